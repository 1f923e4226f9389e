#pragma once

namespace pvtrack::cli {

/// Entry point behind the `pvtrack` binary; exposed so tests can drive the
/// subcommands in-process.
int main(int argc, const char* const* argv);

}  // namespace pvtrack::cli
