#pragma once

#include <string>
#include <vector>

namespace alviz::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kIo = 2;
inline constexpr int kNetwork = 3;

// Subcommands: run, plot, hist, serve, synth. `--config file.toml` supplies
// any flag; explicit flags win over the file.
int main(int argc, char** argv);
int main(const std::vector<std::string>& args);  // args exclude the program name

}  // namespace alviz::cli
