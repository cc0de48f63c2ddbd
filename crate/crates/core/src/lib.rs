//! Process-oriented discrete-event simulation.
//!
//! Arrivals are created by generators and walk [`Trajectory`] chains of
//! activities: seizing and releasing [`resource`]s, waiting, branching,
//! cloning, batching, exchanging signals. Everything that happens is
//! recorded by the [`monitor`].
//!
//! ```
//! use trajsim::{exponential, Environment, GeneratorSpec, ResourceSpec, Trajectory};
//!
//! let mm1 = Trajectory::new()
//!     .seize("server", 1)
//!     .timeout(trajsim::Param::dynamic(|ctx| ctx.exponential(4.0)))
//!     .release("server", 1);
//! let mut env = Environment::with_seed(42);
//! env.add_resource(ResourceSpec::new("server")).unwrap();
//! env.add_generator(GeneratorSpec::new("customer", mm1, exponential(2.0))).unwrap();
//! env.run(100.0).unwrap();
//! assert_eq!(env.now(), 100.0);
//! ```

pub mod env;
pub mod error;
pub mod event;
pub mod format;
pub mod monitor;
pub mod param;
pub mod process;
pub mod replicate;
pub mod resource;
mod sim;
pub mod trajectory;

pub use env::{Environment, GeneratorState, ResourceState, Snapshot};
pub use error::SimError;
pub use event::{EventKey, EventPriority, EventSet};
pub use monitor::{
    get_mon_arrivals, get_mon_attributes, get_mon_resources, ArrivalRow, AttributeRow, Monitor,
    Monitored, ResourceRow,
};
pub use param::Param;
pub use process::{at, constant, exponential, from, uniform, Distribution, GeneratorSpec, Prioritization};
pub use resource::{Limit, PreemptOrder, ResourceSpec};
pub use sim::{trace_line, Ctx, MemoryTrace, NullTrace, StdoutTrace, TraceSink};
pub use trajectory::{Activity, BatchSpec, ResourceRef, SeizeOptions, SelectPolicy, Trajectory};
