#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ambiprobe/lexsub/dataset.hpp"

namespace ambiprobe::lexsub {

enum class Split { Train, Valid, Test };

const char* to_string(Split split) noexcept;

// Item id -> split.
using SplitAssignment = std::map<std::string, Split>;

// Groups items by context string, shuffles the groups with `seed` and hands
// each group to the split furthest below its target share (ties go to the
// earlier split). Items sharing a context always land together. Throws
// SplitError with fewer than three context groups or invalid ratios.
SplitAssignment split_items(const std::vector<SubstitutionItem>& items,
                            std::array<double, 3> ratios, std::uint64_t seed);

// Items of one split, in input order.
std::vector<SubstitutionItem> select(const std::vector<SubstitutionItem>& items,
                                     const SplitAssignment& assignment, Split which);

}  // namespace ambiprobe::lexsub
