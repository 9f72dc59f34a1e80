//! Instances, schedules, profiles and feasibility checks shared by every solver.

pub mod edd;
pub mod gsp;
pub mod step;
pub mod ufp;

pub use edd::{edd_feasible, edd_feasible_intervals, edd_schedule, ExcessWitness, PreemptiveSchedule};
pub use gsp::{schedule_cost, DueDateAssignment, GspInstance, Job, Schedule, ScheduledJob};
pub use step::{Cost, StepCostFunction};
pub use ufp::{dominates, induced_heights, induced_profile, is_feasible_cover, DemandProfile, UfpCoverInstance, UfpTask};
