//! Exact computation of mirror maps, disk potentials and SYZ mirrors for
//! toric Calabi-Yau orbifolds given by stacky fans.

pub mod boxes;
pub mod compactify;
pub mod coords;
pub mod enumerate;
pub mod error;
pub mod fan;
pub mod ifunction;
pub mod invariants;
pub mod lattice;
pub mod mirror;
pub mod rational;
pub mod series;
pub mod syz;
pub mod toric;

pub use boxes::{box_elements, BoxElement, BoxSet};
pub use error::{Error, ErrorKind, Result};
pub use fan::{parse_stacky_fan, StackyFan};
pub use rational::Q;
pub use toric::{kernel_data, verify_calabi_yau, verify_semi_fano, ToricData};
