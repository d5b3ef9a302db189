#![no_std]

extern crate alloc;

pub mod arith;
pub mod base_field;
pub mod char_sums;
pub mod error;
pub mod field_tower;
pub mod fq_poly;
pub mod guarantees;
pub mod norm_system;
pub mod normality;
pub mod oracle;
pub mod upoly;

pub use error::{Error, Result};
pub use num_bigint;
pub use num_traits;
