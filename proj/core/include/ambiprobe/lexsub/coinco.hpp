#pragma once

#include <filesystem>
#include <string_view>
#include <vector>

#include "ambiprobe/lexsub/dataset.hpp"

namespace ambiprobe::lexsub {

// Converts the CoInCo XML release into items. Every <token> with a
// <substitutions> child becomes one item whose context is the tokenized
// precontext, the target sentence's word forms and the tokenized
// postcontext. Ids are "<sentence id>.<token id>". A token flagged
// problematic or whose form contains a hyphen is marked compound. Throws
// InputError on malformed XML.
std::vector<SubstitutionItem> parse_coinco(std::string_view xml);
std::vector<SubstitutionItem> load_coinco(const std::filesystem::path& path);

}  // namespace ambiprobe::lexsub
