#define CATCH_AMALGAMATED_CUSTOM_MAIN
#include "catch_amalgamated.hpp"

#include <glog/logging.h>

int main(int argc, char** argv) {
  // Ceres logs solver progress through glog; keep test output to failures.
  FLAGS_minloglevel = 2;
  google::InitGoogleLogging(argv[0]);
  return Catch::Session().run(argc, argv);
}
