//! Holds the `acceptance` test target, which runs every acceptance criterion
//! through `bergman_harness::criteria` and cross-checks the exact values
//! against independent distribution oracles.
