// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The mixtts Authors
#include <iostream>

#include "mixtts/cli.hpp"

int main(int argc, char** argv) { return mixtts::cli::run(argc, argv, std::cout, std::cerr); }
