//! Holds the end-to-end acceptance checks under `tests/`; no library code.
