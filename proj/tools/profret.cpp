// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#include "profret/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return profret::cli::run(std::move(args), std::cout, std::cerr);
}
