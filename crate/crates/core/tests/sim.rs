use blocktri::kalman;
use blocktri::sim::{self, random_model, Conditioning, MeasPattern, ModelParams, Scenario};
use blocktri::spectral::{self, ProcessOnlySystem};
use blocktri::Error;

fn params(seed: u64, n: usize, big_n: usize, conditioning: Conditioning) -> ModelParams {
    ModelParams {
        seed,
        n,
        big_n,
        meas: MeasPattern::Mixed,
        conditioning,
        singular_process: false,
    }
}

#[test]
fn same_seed_same_scenario() {
    let a = random_model(params(7, 2, 10, Conditioning::Well)).unwrap();
    let b = random_model(params(7, 2, 10, Conditioning::Well)).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    let c = random_model(params(8, 2, 10, Conditioning::Well)).unwrap();
    assert_ne!(a.model, c.model);
}

#[test]
fn well_conditioned_models_have_a_positive_lower_bound() {
    for seed in 0..20 {
        let m = random_model(params(seed, 1 + seed as usize % 3, 12, Conditioning::Well))
            .unwrap()
            .model
            .unwrap();
        let (lo, _) = spectral::theorem1_bounds(&ProcessOnlySystem::from_model(&m).unwrap()).unwrap();
        assert!(lo > 1e-3, "seed {seed}: {lo}");
    }
}

#[test]
fn ill_family_is_nearly_singular_only_at_the_end() {
    let m = random_model(params(1, 1, 10, Conditioning::IllLastBlock)).unwrap().model.unwrap();
    let sys = kalman::assemble_system(&m).unwrap();
    let lam = spectral::sym_eig(&sys.assemble_dense().unwrap()).unwrap().min();
    assert!(lam < 1e-6, "{lam}");
    let g = ProcessOnlySystem::from_model(&m).unwrap().g;
    let norms: Vec<f64> = g.iter().map(|b| spectral::eig::operator_norm(b).unwrap()).collect();
    assert!(norms[..norms.len() - 1].iter().all(|&s| s < 1.0));
    assert_eq!(*norms.last().unwrap(), sim::ILL_LAST_NORM);
}

#[test]
fn measurement_patterns() {
    let none = random_model(ModelParams::well(1, 3, 5, MeasPattern::None)).unwrap().model.unwrap();
    assert!((0..5).all(|k| none.meas_dim(k) == 0));
    let full = random_model(ModelParams::well(1, 3, 5, MeasPattern::Full)).unwrap().model.unwrap();
    assert!((0..5).all(|k| full.meas_dim(k) == 3));
    let one = random_model(ModelParams::well(1, 3, 5, MeasPattern::One)).unwrap().model.unwrap();
    assert!((0..5).all(|k| one.meas_dim(k) == 1));
    let mixed = random_model(ModelParams::well(1, 3, 9, MeasPattern::Mixed)).unwrap().model.unwrap();
    let dims: Vec<usize> = (0..9).map(|k| mixed.meas_dim(k)).collect();
    assert!(dims.contains(&0) && dims.contains(&1) && dims.contains(&3), "{dims:?}");
}

#[test]
fn singular_process_matrices_are_rank_deficient() {
    let mut p = ModelParams::well(3, 3, 6, MeasPattern::Full);
    p.singular_process = true;
    let m = random_model(p).unwrap().model.unwrap();
    for k in 1..6 {
        assert!(m.g(k).clone().svd(false, false).rank(1e-12) < 3);
    }
}

#[test]
fn bad_parameters_are_rejected() {
    assert!(matches!(random_model(params(0, 0, 3, Conditioning::Well)), Err(Error::BadParameters(_))));
    assert!(matches!(random_model(params(0, 2, 0, Conditioning::Well)), Err(Error::BadParameters(_))));
    assert!(matches!(
        random_model(params(0, 2, 1, Conditioning::IllLastBlock)),
        Err(Error::BadParameters(_))
    ));
    assert!(matches!(sim::preset("nope"), Err(Error::BadParameters(_))));
    assert!("sometimes".parse::<MeasPattern>().is_err());
}

#[test]
fn presets_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for (name, _) in sim::PRESETS {
        let s = sim::preset(name).unwrap();
        let path = dir.path().join(format!("{name}.json"));
        s.save(&path).unwrap();
        let back = Scenario::load(&path).unwrap();
        assert_eq!(back.system().unwrap(), s.system().unwrap());
        assert_eq!(back.expected.len(), s.expected.len());
    }
}

#[test]
fn toy_expectations_are_tagged_with_their_source() {
    let s = sim::toy_section6(false);
    let lam = &s.expected["lambda_min"];
    assert_eq!(lam.values, vec![4.8e-9]);
    assert_eq!(s.expected["forward_pivots"].values, vec![14401.0, 14400.0, 4.8222e-9]);
    assert_eq!(sim::toy_section6(true).expected["lambda_min"].values, vec![1.0]);
}
