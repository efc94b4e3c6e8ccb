//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run a subset by number: `cargo test --test acceptance -- 1 5 9`.

use rand::seq::IteratorRandom;
use rand::Rng as _;
use std::f64::consts::E;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;
use taskverse_core::curriculum::{next_level, param_tuple, CurriculumConfig, CurriculumState, EvalSummary, Strategy};
use taskverse_core::env::{ActionSpace, Env, EnvConfig};
use taskverse_core::harness::{cmd_train, evaluate_policy, heldout_tasks, ModelPolicy, RunConfig};
use taskverse_core::learner::{
    masked_log_probs, normalize_observation, Activation, LearnerConfig, Observation, PpoModel, Sample,
};
use taskverse_core::netsim::{enumerate_parametric_actions, init_episode, AbstractAction, Rules, SimConfig};
use taskverse_core::pddl::{eval_bool, eval_num, validate_catalog_json, ActionMask, Catalog, EpisodeFluents};
use taskverse_core::reward::sparse_reward;
use taskverse_core::rng::{rng_for, Rng};
use taskverse_core::universe::{sample_task, ParamLimits, RedTtp, TaskSpec, UniverseConfig};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn config(name: &str) -> RunConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn random_fluents(rng: &mut Rng) -> EpisodeFluents {
    let mut c = || rng.random_range(0..60u64);
    let mut fl = EpisodeFluents {
        good_qos_events: c(),
        bad_qos_events: c(),
        steps_to_survive: c(),
        isolate_actions: c(),
        crown_jewel_relocations: c(),
        num_blue_actions: c(),
        worst_contributor_isolations: c(),
        crown_jewel_isolations: c(),
        worst_contributor_reimages: c(),
        worst_contributor_relocations: c(),
        worst_contributor_honeys: c(),
        full_nontrivial_blue_actions: c(),
        nontrivial_blue_actions: c(),
        ..EpisodeFluents::default()
    };
    fl.red_inactive = rng.random();
    fl.declared_victory = rng.random();
    fl.real_compromise = rng.random();
    fl
}

fn c1_reward_exactness() -> Outcome {
    let pinned = [
        (sparse_reward(true, 0.0).unwrap(), 1.0),
        (sparse_reward(false, 0.0).unwrap(), 0.5),
        (sparse_reward(true, 1.0).unwrap(), 0.5 + 1.0 / (2.0 * E)),
    ];
    let worst_pinned = pinned.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let mut rng = rng_for(1, &[]);
    let mut worst_law = 0.0f64;
    for _ in 0..100_000 {
        let x = rng.random_range(-10.0..10.0) * if rng.random_bool(0.5) { 1.0 } else { 100.0 };
        let d = sparse_reward(true, x).unwrap() - sparse_reward(false, x).unwrap();
        worst_law = worst_law.max((d - 0.5).abs());
    }
    check(
        worst_pinned <= 1e-12 && worst_law <= 1e-12,
        format!("pinned error {worst_pinned:.1e}, difference-law error {worst_law:.1e} over 1e5 draws"),
    )
}

fn c2_catalog_integrity() -> Outcome {
    let records = validate_catalog_json(Catalog::shipped_json()).map_err(|e| e.to_string())?;
    let bad = records.iter().filter(|r| r.error.is_some()).count();
    let catalog = Catalog::shipped();
    let mut rng = rng_for(2, &[]);
    let mut nonfinite = 0;
    for _ in 0..1000 {
        let fl = random_fluents(&mut rng);
        for gm in catalog.entries() {
            let _ = eval_bool(&gm.goal, &fl);
            if !eval_num(&gm.metric, &fl).is_finite() {
                nonfinite += 1;
            }
        }
    }
    let g42 = &catalog.get(42).ok_or("pair 42 missing")?.goal;
    let mut table_ok = true;
    for rc in [false, true] {
        for dv in [false, true] {
            for _ in 0..50 {
                let mut fl = random_fluents(&mut rng);
                fl.real_compromise = rc;
                fl.declared_victory = dv;
                table_ok &= eval_bool(g42, &fl) == (!rc && dv);
            }
        }
    }
    check(
        records.len() == 43 && bad == 0 && nonfinite == 0 && table_ok,
        format!(
            "{} records, {bad} invalid, {nonfinite} non-finite metrics over 1e3 assignments, pair 42 table {}",
            records.len(),
            if table_ok { "ok" } else { "wrong" }
        ),
    )
}

fn c3_mask_soundness() -> Outcome {
    let u = UniverseConfig::default();
    let catalog = Catalog::shipped();
    let rules = Rules::default();
    let mut rng = rng_for(3, &[]);
    let (mut steps, mut probes, mut violations) = (0usize, 0usize, 0usize);
    let mut episode = 0u64;
    while steps < 10_000 {
        episode += 1;
        let parametric = episode % 2 == 0;
        let mut task = sample_task(&u.level(rng.random_range(0..=u.max_level)), &catalog, &mut rng);
        if parametric {
            // keep the per-step probe of every host action affordable
            task.subnets = 2;
            task.hosts_per_subnet = 5;
        }
        let mut s = init_episode(&task, &SimConfig::default(), episode).map_err(|e| e.to_string())?;
        while !s.terminal && steps < 10_000 {
            let mask = if parametric {
                s.parametric_mask()
            } else {
                s.mask(&rules)
            };
            for a in 0..mask.len() {
                let mut probe = s.clone();
                let r = if parametric {
                    probe.step_parametric(a).map(|_| ())
                } else {
                    probe.step(&rules, AbstractAction::from_id(a).unwrap()).map(|_| ())
                };
                probes += 1;
                let sound = match r {
                    Ok(()) => mask.is_set(a),
                    Err(_) => !mask.is_set(a) && probe == s,
                };
                violations += usize::from(!sound);
            }
            let a = mask.set_indices().choose(&mut rng).ok_or("empty mask")?;
            if parametric {
                s.step_parametric(a).map_err(|e| e.to_string())?;
            } else {
                s.step(&rules, AbstractAction::from_id(a).unwrap())
                    .map_err(|e| e.to_string())?;
            }
            steps += 1;
        }
    }
    check(
        violations == 0,
        format!("{steps} steps, {probes} probed actions, {violations} violations"),
    )
}

fn c4_determinism() -> Outcome {
    let mut cfg = config("desk_dynamic.json");
    cfg.steps = 10_000;
    let run = || {
        let mut buf = Vec::new();
        cmd_train(&cfg, 7, &mut buf).map(|_| buf).map_err(|e| e.to_string())
    };
    let (a, b) = (run()?, run()?);
    let lines = a.iter().filter(|&&c| c == b'\n').count();
    check(
        a == b && lines >= 4,
        format!("{} bytes, {lines} lines, identical: {}", a.len(), a == b),
    )
}

fn c5_curriculum_laws() -> Outcome {
    // (level, mean, promote, demote, max_level, expected)
    const TABLE: [(u32, f64, f64, f64, u32, u32); 50] = [
        (0, 0.70, 0.7, 0.4, 10, 1),
        (0, 0.71, 0.7, 0.4, 10, 1),
        (0, 0.6999, 0.7, 0.4, 10, 0),
        (0, 1.00, 0.7, 0.4, 10, 1),
        (5, 0.90, 0.7, 0.4, 10, 6),
        (9, 1.00, 0.7, 0.4, 10, 10),
        (10, 1.00, 0.7, 0.4, 10, 10),
        (10, 0.70, 0.7, 0.4, 10, 10),
        (10, 0.55, 0.7, 0.4, 10, 10),
        (10, 0.39, 0.7, 0.4, 10, 9),
        (5, 0.40, 0.7, 0.4, 10, 5),
        (5, 0.3999, 0.7, 0.4, 10, 4),
        (5, 0.50, 0.7, 0.4, 10, 5),
        (5, 0.6999, 0.7, 0.4, 10, 5),
        (5, 0.00, 0.7, 0.4, 10, 4),
        (1, 0.00, 0.7, 0.4, 10, 0),
        (0, 0.00, 0.7, 0.4, 10, 0),
        (0, 0.39, 0.7, 0.4, 10, 0),
        (0, 0.40, 0.7, 0.4, 10, 0),
        (3, 0.75, 0.7, 0.4, 4, 4),
        (4, 0.99, 0.7, 0.4, 4, 4),
        (4, 0.20, 0.7, 0.4, 4, 3),
        (3, 0.41, 0.7, 0.4, 4, 3),
        (2, 0.65, 0.7, 0.4, 4, 2),
        (0, 1.00, 0.7, 0.4, 0, 0),
        (0, 0.00, 0.7, 0.4, 0, 0),
        (2, 0.79, 0.8, 0.2, 10, 2),
        (2, 0.80, 0.8, 0.2, 10, 3),
        (2, 0.19, 0.8, 0.2, 10, 1),
        (2, 0.20, 0.8, 0.2, 10, 2),
        (2, 0.50, 0.8, 0.2, 10, 2),
        (3, 0.999, 1.0, 0.0, 10, 3),
        (3, 1.00, 1.0, 0.0, 10, 4),
        (3, 0.00, 1.0, 0.0, 10, 3),
        (3, 0.50, 1.0, 0.0, 10, 3),
        (7, 0.60, 0.6, 0.5, 8, 8),
        (8, 0.60, 0.6, 0.5, 8, 8),
        (7, 0.55, 0.6, 0.5, 8, 7),
        (7, 0.50, 0.6, 0.5, 8, 7),
        (7, 0.49, 0.6, 0.5, 8, 6),
        (1, 0.49, 0.6, 0.5, 8, 0),
        (6, 0.95, 0.9, 0.1, 6, 6),
        (5, 0.95, 0.9, 0.1, 6, 6),
        (5, 0.89, 0.9, 0.1, 6, 5),
        (5, 0.10, 0.9, 0.1, 6, 5),
        (5, 0.09, 0.9, 0.1, 6, 4),
        (0, 0.09, 0.9, 0.1, 6, 0),
        (1, 0.70, 0.7, 0.4, 1, 1),
        (1, 0.30, 0.7, 0.4, 1, 0),
        (0, 0.70, 0.7, 0.4, 1, 1),
    ];
    let table_fail = TABLE
        .iter()
        .filter(|(l, m, p, d, max, want)| next_level(*l, *m, *p, *d, *max) != *want)
        .count();

    // Level trajectory through the stateful controller.
    let universe = UniverseConfig {
        max_level: 2,
        ..UniverseConfig::default()
    };
    let cc = CurriculumConfig {
        window: 4,
        ..CurriculumConfig::default()
    };
    let mut st = CurriculumState::new(cc, &universe).map_err(|e| e.to_string())?;
    let mut rng = rng_for(5, &[]);
    let means = [0.9, 0.9, 0.9, 0.5, 0.1, 0.1, 0.1, 0.7, 0.4, 0.39];
    let want = [1, 2, 2, 2, 1, 0, 0, 1, 1, 0];
    let mut trajectory = Vec::new();
    for m in means {
        let s = st.record_evaluation(&[0.0, m, m, m, m]).map_err(|e| e.to_string())?;
        trajectory.push(st.update_level(&s, &universe, &mut rng));
    }
    let traj_ok = trajectory == want;

    // Smooth strategy: each mastery changes exactly one parameter.
    let universe = UniverseConfig::default();
    let catalog = Catalog::shipped();
    let cc = CurriculumConfig {
        strategy: Strategy::Smooth,
        ..CurriculumConfig::default()
    };
    let mut st = CurriculumState::new(cc, &universe).map_err(|e| e.to_string())?;
    st.next_task(&universe, &catalog, &mut rng);
    let mut hamming_bad = 0;
    for i in 0..1000 {
        let before = st.current.clone().unwrap();
        let mean = if i % 10 == 9 { 0.5 } else { 0.9 };
        st.update_level(&EvalSummary { mean, n: 20 }, &universe, &mut rng);
        let after = st.current.clone().unwrap();
        let changed = param_tuple(&before)
            .iter()
            .zip(param_tuple(&after))
            .filter(|(a, b)| **a != *b)
            .count();
        let expected = if mean >= 0.7 { 1 } else { 0 };
        hamming_bad += usize::from(changed != expected || after.goal_metric_id != before.goal_metric_id);
    }
    check(
        table_fail == 0 && traj_ok && hamming_bad == 0,
        format!("{table_fail}/50 table mismatches, trajectory {trajectory:?}, {hamming_bad} non-Hamming-1 successions over 1e3 updates"),
    )
}

fn within(t: &TaskSpec, lo: &ParamLimits, hi: &ParamLimits) -> bool {
    let eps = 1e-9;
    let f = |x: f64, a: f64, b: f64| x >= a - eps && x <= b + eps;
    (lo.subnets..=hi.subnets).contains(&t.subnets)
        && (lo.hosts_per_subnet..=hi.hosts_per_subnet).contains(&t.hosts_per_subnet)
        && (lo.initially_compromised..=hi.initially_compromised).contains(&t.initially_compromised)
        && (lo.horizon..=hi.horizon).contains(&t.horizon)
        && f(t.gray.volume, lo.gray_volume, hi.gray_volume)
        && f(t.gray.diversity, lo.gray_diversity, hi.gray_diversity)
        && f(t.deviation.interval_stretch, lo.interval_stretch, hi.interval_stretch)
        && f(t.deviation.mask_prob, lo.mask_prob, hi.mask_prob)
        && f(t.deviation.mask_diversity, lo.mask_diversity, hi.mask_diversity)
}

fn c6_sampling_bounds() -> Outcome {
    let u = UniverseConfig::default();
    let catalog = Catalog::shipped();
    let mut rng = rng_for(6, &[]);
    let mut bad = 0;
    let (mut subnets, mut hosts) = ((u32::MAX, 0), (u32::MAX, 0));
    for level in 0..=u.max_level {
        let lc = u.level(level);
        for _ in 0..10_000 {
            let t = sample_task(&lc, &catalog, &mut rng);
            let ok = lc.admits(&t)
                && within(&t, &lc.min, &lc.max)
                && lc.ttps.contains(&t.red_ttp)
                && lc.goals.contains(&t.goal_metric_id)
                && (2..=5).contains(&t.subnets)
                && (5..=20).contains(&t.hosts_per_subnet);
            bad += usize::from(!ok);
            subnets = (subnets.0.min(t.subnets), subnets.1.max(t.subnets));
            hosts = (hosts.0.min(t.hosts_per_subnet), hosts.1.max(t.hosts_per_subnet));
        }
    }
    check(
        bad == 0,
        format!(
            "{bad} out-of-bounds samples over {} levels x 1e4; subnets seen {:?}, hosts per subnet seen {:?}",
            u.max_level + 1,
            subnets,
            hosts
        ),
    )
}

fn c7_action_space() -> Outcome {
    let n = |h| enumerate_parametric_actions(h).unwrap();
    let (a, b, c) = (n(50), n(100), n(200));
    let linear = (c - b) == 2 * (b - a);
    check(
        (2700..=3300).contains(&c) && linear,
        format!("|A|(50,100,200) = ({a}, {b}, {c}), linear {linear}"),
    )
}

fn c8_observation_normalization() -> Outcome {
    let u = UniverseConfig::default();
    let catalog = Arc::new(Catalog::shipped());
    let mut rng = rng_for(8, &[]);
    let mut out_of_range = 0usize;
    let mut checked = 0usize;
    let mut worst_scale = 0.0f64;
    for ep in 0..300u64 {
        let parametric = ep % 5 == 4;
        let mut task = sample_task(&u.level(rng.random_range(0..=u.max_level)), &catalog, &mut rng);
        if rng.random_bool(0.1) {
            task.red_ttp = RedTtp::Inactive;
        }
        let space = if parametric {
            ActionSpace::Parametric { max_hosts: 100 }
        } else {
            ActionSpace::Abstract
        };
        let mut env = Env::new(
            EnvConfig {
                action_space: space,
                ..EnvConfig::default()
            },
            catalog.clone(),
        )
        .map_err(|e| e.to_string())?;
        let (obs, info) = env.reset(&task, ep).map_err(|e| e.to_string())?;
        let mut all = vec![obs];
        let mut mask = info.mask;
        loop {
            let a = mask.set_indices().choose(&mut rng).ok_or("empty mask")?;
            let tr = env.step(a).map_err(|e| e.to_string())?;
            all.push(tr.obs.clone());
            if !parametric && task.total_hosts() == 10 {
                worst_scale = worst_scale.max(scale_gap(&env, &tr.step, env.action_count()));
            }
            if tr.done() {
                break;
            }
            mask = tr.mask;
        }
        for o in &all {
            checked += o.features.len();
            out_of_range += o.features.iter().filter(|v| !(0.0..=1.0).contains(*v)).count();
        }
    }
    // Paired scale check on a dedicated 10-host episode.
    let task = TaskSpec {
        subnets: 2,
        hosts_per_subnet: 5,
        ..TaskSpec::default()
    };
    let mut env = Env::new(EnvConfig::default(), catalog.clone()).map_err(|e| e.to_string())?;
    let (_, info) = env.reset(&task, 0).map_err(|e| e.to_string())?;
    let mut mask = info.mask;
    let mut paired = 0;
    loop {
        let a = mask.set_indices().choose(&mut rng).ok_or("empty mask")?;
        let tr = env.step(a).map_err(|e| e.to_string())?;
        worst_scale = worst_scale.max(scale_gap(&env, &tr.step, env.action_count()));
        paired += 1;
        if tr.done() {
            break;
        }
        mask = tr.mask;
    }
    check(
        out_of_range == 0 && worst_scale <= 1e-9,
        format!("{out_of_range}/{checked} features outside [0,1]; 10 vs 40 host scale gap {worst_scale:.1e} over {paired}+ paired steps"),
    )
}

/// Normalizes the current raw features for 10 hosts and the same features
/// with every host-extensive count multiplied by four for 40 hosts.
fn scale_gap(env: &Env, step: &taskverse_core::netsim::StepOutcome, actions: usize) -> f64 {
    let raw = env.raw_observation(Some(step)).unwrap();
    let cfg = &env.config().obs;
    let small = normalize_observation(&raw, 10, actions, cfg);
    let mut big = raw.clone();
    for i in (0..3).chain(4..14) {
        big.base[i] *= 4.0;
    }
    let large = normalize_observation(&big, 40, actions, cfg);
    small
        .features
        .iter()
        .zip(&large.features)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

fn c9_gradient_check() -> Outcome {
    let cfg = LearnerConfig {
        policy_hidden: vec![8, 8],
        value_hidden: vec![8],
        activation: Activation::Tanh,
        kl_coeff: 0.2,
        entropy_coeff: 0.01,
        clip_param: 0.2,
        vf_clip_param: 0.3,
        ..LearnerConfig::default()
    };
    let model = PpoModel::new(cfg.clone(), 3, 3, None, 9).map_err(|e| e.to_string())?;
    let mut rng = rng_for(9, &[]);
    let mut samples = Vec::new();
    for i in 0..24 {
        let state = i % 3;
        let obs = Observation {
            features: (0..3).map(|k| f64::from(u8::from(k == state))).collect(),
            goal_index: 0,
        };
        let mask = ActionMask::new(vec![true, state != 2, true]);
        let mut logits = model.logits(&obs).map_err(|e| e.to_string())?;
        // every fourth sample comes from a distant behaviour policy so its ratio is clipped
        let spread = if i % 4 == 0 { 1.5 } else { 0.05 };
        logits
            .iter_mut()
            .for_each(|l| *l += spread * rng.random_range(-1.0..1.0));
        let action = *mask.set_indices().collect::<Vec<_>>().get(i % 2).unwrap();
        let logp = masked_log_probs(&logits, &mask).map_err(|e| e.to_string())?[action];
        let value_target = if i % 3 == 0 { 2.0 } else { rng.random_range(-0.2..0.2) };
        samples.push(Sample {
            obs,
            mask,
            action,
            logits,
            logp,
            advantage: rng.random_range(-1.0..1.0),
            value_target,
        });
    }
    let refs: Vec<&Sample> = samples.iter().collect();
    let clipped = samples
        .iter()
        .filter(|s| {
            let lp = masked_log_probs(&model.logits(&s.obs).unwrap(), &s.mask).unwrap()[s.action];
            ((lp - s.logp).exp() - 1.0).abs() > cfg.clip_param
        })
        .count();
    let lg = model.loss_and_grad(&model.policy_params, &model.value_params, &refs);
    let h = 1e-5;
    let mut worst = 0.0f64;
    let mut compared = 0;
    for net in 0..2 {
        let base = if net == 0 {
            &model.policy_params
        } else {
            &model.value_params
        };
        let grad = if net == 0 { &lg.policy_grad } else { &lg.value_grad };
        for k in 0..base.len() {
            let loss = |delta: f64| {
                let mut p = base.clone();
                p[k] += delta;
                let r = if net == 0 {
                    model.loss_and_grad(&p, &model.value_params, &refs)
                } else {
                    model.loss_and_grad(&model.policy_params, &p, &refs)
                };
                r.metrics.total_loss
            };
            let fd = (loss(h) - loss(-h)) / (2.0 * h);
            let scale = fd.abs().max(grad[k].abs());
            let err = if scale < 1e-8 {
                (fd - grad[k]).abs()
            } else {
                (fd - grad[k]).abs() / scale
            };
            worst = worst.max(err);
            compared += 1;
        }
    }
    check(
        worst < 1e-4 && clipped > 0,
        format!(
            "max relative error {worst:.2e} over {compared} parameters; {clipped}/24 samples outside the clip range"
        ),
    )
}

fn c10_learning_smoke() -> Outcome {
    let cfg = config("goal1_min.json");
    let mut lines = Vec::new();
    let mut passed = 0;
    for &seed in &cfg.seeds {
        let t0 = Instant::now();
        let s = cmd_train(&cfg, seed, &mut std::io::sink()).map_err(|e| e.to_string())?;
        let best = s.eval_means.iter().copied().fold(f64::NAN, f64::max);
        let ok = s.steps <= 300_000 && best >= 0.75;
        passed += usize::from(ok);
        lines.push(format!(
            "seed {seed}: best eval {best:.3} at {} steps ({:.0}s)",
            s.steps,
            t0.elapsed().as_secs_f64()
        ));
    }
    check(
        passed == 3 && cfg.seeds.len() == 3,
        format!("{passed}/3 seeds; {}", lines.join("; ")),
    )
}

/// Trains `a` and `b` on each seed and compares held-out means, requiring
/// `a` to win at least 3 of 5 pairs.
fn paired_runs(a: &RunConfig, b: &RunConfig, goals: &[u32], episodes: usize, strict: bool) -> Outcome {
    let tasks = heldout_tasks(&a.universe, goals);
    let catalog = Arc::new(a.load_catalog().map_err(|e| e.to_string())?);
    let mut wins = 0;
    let mut lines = Vec::new();
    for &seed in &a.seeds {
        let mut means = [0.0; 2];
        for (i, cfg) in [a, b].into_iter().enumerate() {
            let s = cmd_train(cfg, seed, &mut std::io::sink()).map_err(|e| e.to_string())?;
            let policy = ModelPolicy {
                model: &s.model,
                explore: true,
            };
            let r = evaluate_policy(&policy, &cfg.env, &catalog, &tasks, episodes, 1000 + seed, None)
                .map_err(|e| e.to_string())?;
            means[i] = r.mean_reward;
        }
        let win = if strict {
            means[0] > means[1]
        } else {
            means[0] >= means[1]
        };
        wins += usize::from(win);
        lines.push(format!("seed {seed} {:.3} vs {:.3}", means[0], means[1]));
    }
    check(
        wins >= 3 && a.seeds.len() == 5,
        format!("{wins}/{} pairs; {}", a.seeds.len(), lines.join(", ")),
    )
}

fn c11_dynamic_vs_fixed() -> Outcome {
    let dynamic = config("desk_dynamic.json");
    let fixed = config("desk_fixed.json");
    assert_eq!(dynamic.universe, fixed.universe);
    assert_eq!(dynamic.steps, 500_000);
    let goals = dynamic.universe.goals.all_goals();
    paired_runs(&dynamic, &fixed, &goals, 200, false)
}

fn c12_tier_ordering() -> Outcome {
    let asc = config("desk_tiers_ascending.json");
    let rev = config("desk_tiers_reverse.json");
    assert_eq!(asc.universe.bounds, rev.universe.bounds);
    assert_eq!(asc.steps, rev.steps);
    let goals: Vec<u32> = (1..=43).collect();
    paired_runs(&asc, &rev, &goals, 430, true)
}

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "reward exactness", c1_reward_exactness),
        (2, "catalog integrity", c2_catalog_integrity),
        (3, "mask soundness", c3_mask_soundness),
        (4, "determinism", c4_determinism),
        (5, "curriculum laws", c5_curriculum_laws),
        (6, "sampling bounds", c6_sampling_bounds),
        (7, "action-space calibration", c7_action_space),
        (8, "observation normalization", c8_observation_normalization),
        (9, "gradient check", c9_gradient_check),
        (10, "learning smoke", c10_learning_smoke),
        (11, "dynamic vs fixed selection", c11_dynamic_vs_fixed),
        (12, "tier ordering", c12_tier_ordering),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, name, run) in criteria {
        if !selected.is_empty() && !selected.contains(&n) {
            continue;
        }
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {n:>2} PASS {name} ({secs:.1}s): {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n:>2} FAIL {name} ({secs:.1}s): {d}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
