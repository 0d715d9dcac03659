//! Exact cutting-plane classification of union-closed families into FC and
//! Non-FC, with independently checkable certificates.

pub mod certify;
pub mod driver;
pub mod family;
pub mod io;
pub mod lp;
pub mod report;
pub mod separation;
pub mod structure;
