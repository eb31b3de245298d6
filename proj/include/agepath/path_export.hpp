#pragma once

#include "agepath/path.hpp"

#include <iosfwd>
#include <string>

namespace agepath {

// JSON lines: a metadata header, then one record per path point in lambda
// order. Events ride on the point at their lambda. Numbers are written with
// round-trip precision, and nothing time-dependent is included, so the same
// path always gives the same bytes.
void write_jsonl(std::ostream& os, const AgePath& path);

// lambda plus one column per parameter, %.17g.
void write_csv(std::ostream& os, const AgePath& path);

// Inverse of write_jsonl. Weights are not exported, so imported points carry
// empty weight vectors; everything else round-trips exactly.
AgePath read_jsonl(std::istream& is);

void write_jsonl(const std::string& file, const AgePath& path);
void write_csv(const std::string& file, const AgePath& path);
AgePath read_jsonl(const std::string& file);

}  // namespace agepath
