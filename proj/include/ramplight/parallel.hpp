#pragma once

namespace ramplight {

/// Applies the RAMPLIGHT_THREADS cap to the OpenMP runtime. Called once by
/// the CLI and the test mains; harmless to call repeatedly.
void configure_threads();

int max_threads();

}  // namespace ramplight
