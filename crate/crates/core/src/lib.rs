//! Chart-based Riemannian geometry in truncated Taylor arithmetic, with
//! residual checks for Killing fields whose derivative is a twistor form.

pub mod chart;
pub mod curvature;
pub mod error;
pub mod families;
pub mod fields;
pub mod forms;
pub mod metric;
pub mod taylor;
pub mod tensor;
pub mod twistor;

pub use chart::ChartDomain;
pub use error::{GeometryError, Result};
pub use families::{FamilyInstance, FamilySpec, Profile, ProfileSpec};
pub use fields::TensorField;
pub use metric::{MetricField, PointGeometry};
pub use taylor::TaylorScalar;
pub use tensor::{Slot, Tensor};
pub use twistor::{IdentityRecord, KillingInstance, Status, Tolerances};
