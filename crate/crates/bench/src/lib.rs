//! Fixtures shared by the benchmarks.

use pfskit_core::strategy::{concentrated_fixture, SingleRegionModel};
use pfskit_core::{CampaignOutcome, PairedCampaigns, PriorSpec};

/// Failure region in a rare subdomain of ten.
pub fn rare_subdomain_model() -> SingleRegionModel {
    concentrated_fixture(0.001, 0.01, 10).expect("valid fixture")
}

/// Real and simulated campaigns of comparable size.
pub fn paired_campaigns() -> PairedCampaigns {
    PairedCampaigns::new(
        CampaignOutcome { tests: 500, failures: 17 },
        CampaignOutcome { tests: 2000, failures: 45 },
    )
    .expect("valid campaigns")
}

/// Beta(2, 5) density tabulated on `m` points.
pub fn grid_prior(m: usize) -> PriorSpec {
    let values = (0..m)
        .map(|j| {
            let th = j as f64 / (m - 1) as f64;
            th * (1.0 - th).powi(4)
        })
        .collect();
    PriorSpec::grid_normalized(values).expect("positive mass")
}
