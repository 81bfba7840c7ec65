//! Khovanov homology through the dotted cobordism category, and exact truncated
//! presentations of skein lasagna modules built from handle data.

pub mod cobcat;
pub mod complex;
pub mod diagram;
pub mod error;
pub mod field;
pub mod lasagna;
pub mod linalg;
pub mod onehandle;

pub use error::{Error, Result};
pub use field::{Coef, Field};
