//
// Project llm4sd - Copyright 2026 The llm4sd Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef LLM4SD_DATA_FILES_HPP_
#define LLM4SD_DATA_FILES_HPP_

#include <string_view>

// Versioned text tables from data/, compiled into the library.
namespace llm4sd::data_files {
std::string_view elements();
std::string_view tpsa_contributions();
std::string_view crippen_contributions();
std::string_view tasks();
std::string_view dataset_manifest();
std::string_view phrase_registry();
}  // namespace llm4sd::data_files

#endif  // LLM4SD_DATA_FILES_HPP_
