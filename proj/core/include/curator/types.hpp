#pragma once

#include <cstdint>
#include <string>

namespace curator {

// A concept in the label system is addressed by an opaque unique token.
using ConceptId = std::string;

// Samples are numbered monotonically as they are generated.
using SampleId = std::uint64_t;

}  // namespace curator
