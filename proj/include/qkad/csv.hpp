#pragma once

#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace qkad {

// RFC 4180 flavoured: quoted fields may hold commas, doubled quotes and
// newlines.
std::vector<std::string> parse_csv_record(const std::string& line);

// Reads one logical record, joining physical lines while a quote is open.
// Returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields);

std::string csv_escape(const std::string& field);

void write_csv_record(std::ostream& out, std::span<const std::string> fields);

}  // namespace qkad
