// Copyright 2026 The cascade-hybrid Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CHB_MATRIX_IO_HPP_
#define CHB_MATRIX_IO_HPP_

#include <filesystem>
#include <iosfwd>

#include "chb/common.hpp"

namespace chb {

// Text matrix format: a "rows cols" header line, then one line per row with
// entries in shortest round-trip decimal form, separated by single spaces.

void write_matrix(std::ostream& os, const MatrixXd& m);
MatrixXd read_matrix(std::istream& is);

void write_matrix(const std::filesystem::path& path, const MatrixXd& m);
MatrixXd read_matrix(const std::filesystem::path& path);

}  // namespace chb

#endif  // CHB_MATRIX_IO_HPP_
