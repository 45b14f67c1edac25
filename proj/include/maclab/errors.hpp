#pragma once

#include <stdexcept>
#include <string>

namespace maclab {

// Raised when an iterative solver fails to converge or a schedule degenerates.
// The CLI maps this to exit code 3.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// Raised on malformed configs or input files. Carries the offending field path
// so the CLI can print "where" along with "what". Exit code 2.
struct config_error : std::runtime_error {
    config_error(const std::string& field_path, const std::string& what)
        : std::runtime_error(field_path + ": " + what), field(field_path) {}
    std::string field;
};

}  // namespace maclab
