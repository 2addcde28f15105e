#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>
#include <torch/torch.h>

#include "a2f/log.hpp"

int main(int argc, char** argv) {
  torch::set_num_threads(1);
  a2f::log::set_level(a2f::log::Level::warn);
  doctest::Context context(argc, argv);
  return context.run();
}
