#pragma once

namespace pzsim {

// Command-line front end. Subcommands: sweep-freq, sweep-load, mass-study,
// transient, fit, report. Exit codes: 0 success, 2 usage error, 3 data or
// format error, 4 numeric failure (e.g. a fit that did not converge).
int cli_dispatch(int argc, const char* const* argv);

} // namespace pzsim
