#pragma once

#include <string>

#include "titan/data/types.hpp"

namespace titan::data {

// Canonical float formatting used by every writer in the project: fixed six
// decimals, negative zero normalized to "0.000000".  Values survive a
// write/parse/write cycle byte for byte.
std::string fmt6(double v);

// Line-oriented clip format.  Line 1 is a header object; each frame then
// contributes one ego object followed by the frame's track objects in
// ascending track_id order.  UTF-8, LF endings, keys in fixed order.
//
// load_clip throws std::runtime_error with "path:line" context for malformed
// JSON or missing/mistyped fields, and a validation message for invariant
// violations.  Frames missing a record for a known track are filled by
// holding the nearest observed frame (earlier if any, else the first later
// one) with visibility false.
Clip load_clip(const std::string& path);

// Every *.jsonl clip in a directory, in filename order.  Throws when the
// directory is missing; an empty directory yields an empty vector.
std::vector<Clip> load_clip_dir(const std::string& dir);

void save_clip(const Clip& clip, const std::string& path);

// The exact bytes save_clip writes.
std::string clip_to_jsonl(const Clip& clip);

}  // namespace titan::data
