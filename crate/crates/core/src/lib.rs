//! Computational toolkit for Higman-type finitely presented groups.

pub mod word;
pub mod presentation;
pub mod coset_enum;
pub mod abelianize;
pub mod quotient_search;
pub mod arithmetic;
pub mod exact_models;
pub mod amalgam;
pub mod cli;
