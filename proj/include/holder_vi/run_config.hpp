#pragma once

#include "holder_vi/core.hpp"

#include <iosfwd>
#include <map>

namespace hvi {

/// Everything needed to reproduce one run: problem, solver settings and output options.
struct RunConfig {
  std::string problem = "power";  ///< mini-grammar spec, e.g. "power:d=5,nu=1,r=1"
  SolverConfig solver;
  std::string out_dir = ".";
  /// Test hook: multiply the problem's declared H before the run.
  double declared_H_scale = 1.0;

  /// Resolved INI text, problem parameters and solver defaults expanded.
  std::string to_ini() const;
  /// The INI text with every line prefixed by "# ".
  std::string echo() const;
};

/// Parse an INI document with sections [problem], [solver], [output].
/// Unknown sections or keys are ConfigErrors naming the key.
RunConfig parse_run_config(const std::string& text);

/// Reads the "# " comment header of a trace file back into a RunConfig.
RunConfig parse_echo(const std::string& text);

RunConfig load_run_config(const std::string& path);

}  // namespace hvi
