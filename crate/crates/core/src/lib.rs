//! Magnetic equivariant K-theory at the level of representation rings and
//! coefficient groups, rational ranks for finite group actions on the
//! 2-torus, and spin-resolved Chern invariants of C4T + Sz symmetric Bloch
//! Hamiltonians.

pub mod bloch;
pub mod chars;
pub mod cli;
pub mod corep;
pub mod groups;
pub mod kcoeff;
pub mod linalg;
pub mod torus;
