#pragma once

#include <cstdint>
#include <functional>

#include "CLI11.hpp"

namespace drainage::cli {

struct Common {
    std::uint64_t seed = 1;
    unsigned workers = 0;
    bool dry_run = false;
};

// Adds every subcommand to `app`. The parsed subcommand stores its work in `action`.
void register_commands(CLI::App& app, Common& common, std::function<void()>& action);

} // namespace drainage::cli
