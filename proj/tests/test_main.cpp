#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>

int main(int argc, char** argv) {
  // Multi-threaded BLAS perturbs the last bits between runs; the suites
  // assert exact reproducibility in several places.
  setenv("OPENBLAS_NUM_THREADS", "1", 1);
  setenv("OMP_NUM_THREADS", "1", 1);
  return doctest::Context(argc, argv).run();
}
