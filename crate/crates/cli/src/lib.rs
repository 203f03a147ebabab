//! File formats, rendering and experiment plumbing for the sandpile CLI.
