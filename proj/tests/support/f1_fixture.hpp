#pragma once

// Three sentences with hand-counted entity matches:
//   s1 gold per[0,2) loc[3,4)      pred per[0,2) org[3,4)   -> per tp, loc fn, org fp
//   s2 gold org[1,4)               pred org[1,3)            -> org fp, org fn
//   s3 gold loc[0,1) per[2,3)      pred identical           -> loc tp, per tp
// Totals: tp 3, fp 2, fn 2; P = R = F1 = 0.6; 9 of 11 tokens correct.
// Per type: per 2/0/0, loc 1/0/1, org 0/2/1.

#include <string>
#include <vector>

namespace hme::testing {

struct F1Fixture {
  std::vector<std::vector<std::string>> tokens, gold, pred;
};

inline F1Fixture f1_fixture() {
  return {{{"Ana", "Lopez", "en", "Madrid"}, {"la", "Casa", "Blanca", "Rosa"}, {"Roma", "y", "Luis"}},
          {{"B-per", "I-per", "O", "B-loc"}, {"O", "B-org", "I-org", "I-org"}, {"B-loc", "O", "B-per"}},
          {{"B-per", "I-per", "O", "B-org"}, {"O", "B-org", "I-org", "O"}, {"B-loc", "O", "B-per"}}};
}

inline std::string to_conll(const std::vector<std::vector<std::string>>& tokens,
                            const std::vector<std::vector<std::string>>& tags) {
  std::string out;
  for (std::size_t s = 0; s < tokens.size(); ++s) {
    for (std::size_t i = 0; i < tokens[s].size(); ++i) out += tokens[s][i] + "\t" + tags[s][i] + "\n";
    out += "\n";
  }
  return out;
}

}  // namespace hme::testing
