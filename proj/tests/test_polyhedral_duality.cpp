#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"

// 100 seeded random cones: every enumerated generator is a member, conic
// combinations reconstruct through the LP, clear outsiders do not, and the
// support-direction answers of generators and LP agree.
TEST_CASE("seeded extreme-ray vs LP duality battery") {
  const std::string failures = testsupport::polyhedral_duality_suite(100);
  CHECK_MESSAGE(failures.empty(), failures);
}
