#pragma once

#include <string>
#include <string_view>

namespace terra {

/// Hex SHA-1 of "blob <size>\0<bytes>", the object id git would assign.
std::string git_blob_hash(std::string_view bytes);

/// git_blob_hash of a file's contents. Throws IoError if unreadable.
std::string git_blob_hash_file(const std::string& path);

/// Current UTC time as ISO-8601, e.g. 2024-01-31T12:00:00Z.
std::string utc_timestamp();

} // namespace terra
