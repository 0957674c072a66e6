#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"

// The definition ladder (nash => local nash => calm local minimax => local
// minimax) must never be violated by the grid verdicts, at any resolution;
// classify() throws InternalInconsistency when it is, and the chain_suite
// also re-derives the implications from the reported values.
TEST_CASE("implication chain audit over the corpus at several resolutions") {
  const std::string failures = testsupport::chain_suite({41, 81, 201});
  CHECK_MESSAGE(failures.empty(), failures);
}

// Certificates and brute force must tell one story on the corpus: no proved
// sufficiency at an oracle-refuted point, no refuted necessity at an
// oracle-confirmed one.
TEST_CASE("certificates never contradict the finest-resolution oracle") {
  const std::string failures = testsupport::soundness_suite();
  CHECK_MESSAGE(failures.empty(), failures);
}
