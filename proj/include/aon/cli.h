/* Copyright 2026 The AON Authors. All Rights Reserved.

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

#ifndef AON_CLI_H_
#define AON_CLI_H_

namespace aon {

// Command-line entry point. Subcommands: gen-data, train, eval, infer,
// trend, gradcheck, selftest. Returns 0 on success, 1 on usage errors and 2
// on runtime failures. Results go to stdout, diagnostics to stderr.
int cli_main(int argc, char** argv);

}  // namespace aon

#endif  // AON_CLI_H_
