//! The README walk-through: predict the estimator's steady-state deviation
//! on a seeded benchmark graph, then simulate it.

use graphlms::experiments::benchmark_graph;
use graphlms::lms::{self, InitialEstimate, ObservationModel};
use graphlms::msd::TheoryModel;
use graphlms::nalgebra::DVector;
use graphlms::operators::BandLimiter;
use graphlms::sampling::{self, SamplerKind};
use graphlms::scenario::{bandlimited_test_signal, CoeffRule};
use graphlms::sets::FrequencySet;
use graphlms::spectrum::Spectrum;

fn main() -> Result<(), graphlms::Error> {
    let graph = benchmark_graph(26, 50)?;
    let spectrum = Spectrum::decompose(&graph)?;
    let freq = FrequencySet::lowest(10, 50)?;
    let noise = DVector::from_element(50, 1e-3);

    // Choose where to observe, then simulate and compare with the theory.
    let set = sampling::select(&SamplerKind::MaxDet, &spectrum, &freq, &noise, 0.5, 10)?;
    let theory = TheoryModel::build(&spectrum, &freq, &set, &noise, 0.5)?;
    println!("predicted steady deviation: {}", theory.steady_state_msd()?);

    let truth = bandlimited_test_signal(&spectrum, &freq, CoeffRule::Seeded { seed: 1 })?;
    let band = BandLimiter::new(&spectrum, freq)?;
    let model = ObservationModel::new(band, set, truth, noise, 7)?;
    let run = lms::run(&model, 0.5, 600, &InitialEstimate::Zero)?;
    println!("final deviation: {}", run.squared_deviation.last().unwrap());
    Ok(())
}
