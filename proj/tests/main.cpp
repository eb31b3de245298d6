#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include "agepath/log.hpp"

int main(int argc, char** argv) {
  agepath::log::init_from_env();
  doctest::Context ctx(argc, argv);
  return ctx.run();
}
