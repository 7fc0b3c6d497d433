// SPDX-FileCopyrightText: © 2026 The rilab authors
//
// SPDX-License-Identifier: Apache-2.0

#include <iostream>

#include "rilab/cli.hpp"

int main(int argc, char** argv) { return rilab::run_cli(argc, argv, std::cout, std::cerr); }
