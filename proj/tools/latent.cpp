#include "latent/cli.hpp"

int main(int argc, char** argv) { return latent::run_cli(argc, argv); }
