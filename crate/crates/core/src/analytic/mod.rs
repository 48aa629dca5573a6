//! Exact evaluation of the FSA-RD average age of information.

mod binomial;
mod model;
mod occupancy;

pub use binomial::binomial_pmf;
pub use model::{
    average_aoi, data_slot_success_pmf, frame_arrival_prob, renewal_moments,
    reservation_success_prob, service_moments, waiting_moments, AnalyticReport, DataSlotPmf,
    RenewalMoments, ServiceMoments, WaitingMoments, CROSS_CHECK_RTOL,
};
pub use occupancy::{
    singleton_pmf, singleton_pmf_closed, SingletonPmf, SingletonTable, CLOSED_FORM_ERROR_LIMIT,
};
