#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "edicke/spectrum.hpp"

int main(int argc, char** argv) {
  edicke::select_backend_kernels(argv);
  return doctest::Context(argc, argv).run();
}
