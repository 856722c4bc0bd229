/* Copyright 2026 The AttrCert Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#ifndef ATTRCERT_CLI_HPP_
#define ATTRCERT_CLI_HPP_

#include <string>
#include <vector>

namespace attrcert::cli {

/// Entry point shared by the attrcert binary and the test suites; args are
/// argv without the program name. Exit codes: 0 success, 1 runtime failure,
/// 2 usage error, 3 soundness violation.
int run_cli(const std::vector<std::string>& args);

}  // namespace attrcert::cli

#endif  // ATTRCERT_CLI_HPP_
