//! Capacity games on SINR wireless networks.
//!
//! A set of sender/receiver link pairs shares a wireless medium. A
//! transmission on link `v` succeeds when its signal-to-interference-and-noise
//! ratio clears a threshold β (the physical interference model). This crate
//! provides:
//!
//! * [`metric`] — point sets (Euclidean plane or validated distance tables)
//!   and link instances on top of them;
//! * [`sinr`] — power assignments, affectance, feasibility tests, and signal
//!   strengthening;
//! * [`game`] — a repeated transmit/defer game with no-regret learners
//!   (randomized weighted majority and EXP3) under bandit feedback;
//! * [`schedule`] — centralized baselines: a length-ordered admission greedy,
//!   a threshold search wrapped around it, and exact small-instance oracles;
//! * [`instances`] — random instance generation and JSON (de)serialization;
//! * [`verify`] — checkers for the structural facts the rest of the crate
//!   relies on (load sandwiches, separation bounds, failure fractions).
//!
//! Batch helpers in [`exec`] run data-parallel when the default `parallel`
//! feature is enabled and sequentially otherwise; results are identical
//! either way because every work item derives its own RNG stream.

pub mod exec;
pub mod game;
pub mod instances;
pub mod metric;
pub mod schedule;
pub mod sinr;
pub mod verify;
