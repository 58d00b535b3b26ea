#pragma once

#include <string>
#include <string_view>

namespace copilot::ingest {

/// Converts markup (or plain text) to retrieval text.
///
/// Script, style, noscript and template bodies are discarded. Block-level
/// elements and blank lines become paragraph breaks ("\n\n"); any other run
/// of whitespace collapses to one space. Common character entities are
/// decoded. A '<' only opens a tag when followed by a letter, '/', '!' or
/// '?', so comparisons like "age < 56" survive in plain text.
std::string extract_text(std::string_view raw);

}  // namespace copilot::ingest
