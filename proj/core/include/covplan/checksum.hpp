// Copyright 2026 The covplan Authors.
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

#ifndef COVPLAN_CHECKSUM_HPP_
#define COVPLAN_CHECKSUM_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

namespace covplan {

// CRC-32 (zlib polynomial), chainable through `previous`.
std::uint32_t crc32(std::span<const std::byte> bytes, std::uint32_t previous = 0);
std::uint32_t crc32(std::string_view text, std::uint32_t previous = 0);

std::uint32_t crc32_file(const std::filesystem::path& path, std::uint32_t previous = 0);

// Lower-case 8-digit hex rendering.
std::string hex32(std::uint32_t value);

}  // namespace covplan

#endif  // COVPLAN_CHECKSUM_HPP_
