//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_UTIL_HASH_HPP_
#define LLM4SD_UTIL_HASH_HPP_

#include <string>
#include <string_view>

namespace llm4sd::util {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

}  // namespace llm4sd::util

#endif  // LLM4SD_UTIL_HASH_HPP_
