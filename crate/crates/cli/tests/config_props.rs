use std::path::{Path, PathBuf};

use alphadyn::dynamics::{NoiseDistribution, TimeScheme};
use alphadyn_cli::config::{InitialSpec, ProfileSpec, RunConfig};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, -1.0..1.0f64, Just(0.0), Just(1e-300)]
}

fn profile() -> impl Strategy<Value = ProfileSpec> {
    prop_oneof![
        finite().prop_map(ProfileSpec::Constant),
        finite().prop_map(ProfileSpec::Kinematic),
        (finite(), prop::collection::vec((0u32..12, finite()), 1..5)).prop_map(|(c, t)| ProfileSpec::Poly(c, t)),
        (finite(), "[a-z][a-z0-9_./]{0,12}").prop_map(|(c, p)| ProfileSpec::File(c, PathBuf::from(p))),
    ]
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    (
        (profile(), 1u32..5, 2usize..500, finite(), finite(), 2usize..100, 1usize..10, finite(), 0usize..1000),
        (profile(), 1u32..5, 2usize..500),
        (
            (finite(), finite(), finite(), finite(), 2usize..500, finite(), finite(), any::<u64>(), 1usize..50),
            (
                profile(),
                any::<bool>(),
                prop::sample::select(vec![TimeScheme::Imex, TimeScheme::ExplicitAb3]),
                prop::sample::select(vec![
                    NoiseDistribution::Gaussian,
                    NoiseDistribution::Uniform,
                    NoiseDistribution::UniformHalfWidth,
                ]),
                (any::<bool>(), finite()),
                prop::collection::vec(finite(), 0..4),
                finite(),
                prop::option::of("[a-z]{1,8}"),
            ),
        ),
        (finite(), finite(), prop::option::of(finite()), finite(), finite(), finite(), finite(), finite()),
    )
        .prop_map(|(sp, ch, (ev1, ev2), rv)| {
            let mut c = RunConfig::default();
            let s = &mut c.spectrum;
            (s.profile, s.l, s.n, s.c_star_min, s.c_star_max, s.c_star_steps, s.k, s.ep_tol, s.ep_refine_n) = sp;
            (c.check.profile, c.check.l, c.check.n) = ch;
            let e = &mut c.evolve;
            (e.c, e.d, e.tau_corr, e.e0_mag, e.n, e.dt, e.t_end, e.seed, e.record_stride) = ev1;
            let (initial_seed, amp) = ev2.4;
            e.shape = ev2.0;
            e.quench = ev2.1;
            e.scheme = ev2.2;
            e.noise = ev2.3;
            e.initial = if initial_seed { InitialSpec::Seed(amp) } else { InitialSpec::FreeDecay(amp) };
            e.snapshot_times = ev2.5;
            e.saturated_fraction = ev2.6;
            e.checkpoint = ev2.7.clone().map(PathBuf::from);
            e.resume = ev2.7.map(|p| PathBuf::from(format!("{p}.ckpt")));
            let r = &mut c.reversals;
            (r.threshold_frac, r.persistence, r.plateau_window, r.t_min, r.t_before, r.t_after, r.time_scale, r.vadm_scale) =
                rv;
            c
        })
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(cfg in run_config()) {
        let text = cfg.serialize();
        let back = RunConfig::parse(&text, Path::new("generated.cfg")).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn profile_display_round_trips(p in profile()) {
        let back: ProfileSpec = p.to_string().parse().unwrap();
        prop_assert_eq!(back, p);
    }
}
