#pragma once

namespace adjset {

/// Execution policy for the data-parallel kernels. `serial` is the reference
/// path; `parallel` uses OpenMP and must produce identical results.
enum class Exec { serial, parallel };

}  // namespace adjset
