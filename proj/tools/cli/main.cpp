// Copyright 2026 The vafx Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) { return vafx::cli::run_cli(argc, argv, std::cout, std::cerr); }
