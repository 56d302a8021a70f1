//! Fuzzy decision engine for an assistive smart home.

pub mod bus;
pub mod fuzzy;
pub mod qr;
pub mod rulebook;
pub mod service;
pub mod sim;
