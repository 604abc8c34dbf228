mod common;

use common::{oracle_logit, set_times};
use vmsdta::compliance::{ComplianceModel, Observation, Perception};
use vmsdta::daytoday::run_day_to_day;
use vmsdta::dnl::run_dnl;
use vmsdta::network::{DemandRow, RawLink, RawNetwork, RawNode, RawPath, RawSign, ScenarioInputs};
use vmsdta::scenario::fig1;
use vmsdta::Scenario;

fn fig1_with(model: ComplianceModel, days: usize) -> Scenario {
    let mut inputs = fig1();
    inputs.config.compliance.model = model;
    inputs.config.solver.max_days = days;
    inputs.config.solver.gap_tolerance = 1e-12;
    inputs.validate().unwrap()
}

#[test]
fn model_one_three_day_trace() {
    let s = fig1_with(ComplianceModel::I, 3);
    let out = run_day_to_day(&s, None).unwrap();
    let (w, beta): (f64, f64) = (0.3, 0.01);
    let mut x: f64 = 0.0;
    let mut cr = 0.5;
    for d in &out.days {
        let rec = &d.compliance[0];
        assert!((rec.cr - cr).abs() < 1e-12);
        let r = run_dnl(&s, &d.profile, &[((0, 0), rec.cr)].into_iter().collect()).unwrap();
        let nf = set_times(&s, &r, &[0, 1]);
        let f = set_times(&s, &r, &[2]);
        // Ω = [600, 2400) covers whole 10 s bins 60..240
        let s_bar = (60..240).map(|k| nf[k] - f[k]).sum::<f64>() / 180.0;
        x = (1.0 - w) * x + w * s_bar;
        cr = oracle_logit(beta, x);

        let Observation::Saving { s_bar: got, .. } = rec.observation else { panic!("saving model") };
        assert!((got - s_bar).abs() < 1e-9, "day {}: S̄ {got} vs {s_bar}", d.day);
        let Perception::Saving { x: got_x } = rec.perception else { panic!("saving model") };
        assert!((got_x - x).abs() < 1e-9);
        assert!((rec.next_cr - cr).abs() < 1e-9);
    }
}

#[test]
fn model_two_three_day_trace() {
    let s = fig1_with(ComplianceModel::II, 3);
    let out = run_day_to_day(&s, None).unwrap();
    let (w, beta): (f64, f64) = (0.3, 0.01);
    // free-flow traversal from b: follow 3 links, not follow the mean of 3 and 4 links
    let (mut yf, mut ynf) = (120.0, 140.0);
    let mut cr = (-beta * yf).exp() / ((-beta * yf).exp() + (-beta * ynf).exp());
    for d in &out.days {
        let rec = &d.compliance[0];
        assert!((rec.cr - cr).abs() < 1e-12);
        let r = run_dnl(&s, &d.profile, &[((0, 0), rec.cr)].into_iter().collect()).unwrap();
        let f = set_times(&s, &r, &[2]);
        let nf = set_times(&s, &r, &[0, 1]);
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let std = |v: &[f64], m: f64| (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64).sqrt();
        let (mf, mnf) = (mean(&f), mean(&nf));
        yf = (1.0 - w) * yf + w * mf;
        ynf = (1.0 - w) * ynf + w * mnf;
        cr = (-beta * yf).exp() / ((-beta * yf).exp() + (-beta * ynf).exp());

        let Observation::Times { mu_f, mu_nf, sigma_f, sigma_nf } = rec.observation else { panic!("times model") };
        assert!((mu_f - mf).abs() < 1e-9 && (mu_nf - mnf).abs() < 1e-9);
        assert!((sigma_f - std(&f, mf)).abs() < 1e-9 && (sigma_nf - std(&nf, mnf)).abs() < 1e-9);
        assert!((rec.next_cr - cr).abs() < 1e-9);
    }
}

#[test]
fn model_three_without_threshold_is_model_one() {
    let one = run_day_to_day(&fig1_with(ComplianceModel::I, 50), None).unwrap();
    let mut inputs = fig1();
    inputs.config.compliance.model = ComplianceModel::III;
    inputs.config.compliance.gamma = 0.0;
    inputs.config.solver.max_days = 50;
    inputs.config.solver.gap_tolerance = 1e-12;
    let three = run_day_to_day(&inputs.validate().unwrap(), None).unwrap();
    assert_eq!(one.days, three.days);
}

#[test]
fn model_three_ignores_savings_below_threshold() {
    let s = fig1_with(ComplianceModel::III, 40);
    let out = run_day_to_day(&s, None).unwrap();
    let (mut above, mut below) = (0, 0);
    for d in &out.days {
        let Observation::Saving { s_bar, s_bar_effective } = d.compliance[0].observation else { panic!() };
        if (0.0..200.0).contains(&s_bar) {
            below += 1;
            assert_eq!(s_bar_effective, 0.0);
        } else {
            above += 1;
            assert_eq!(s_bar_effective, s_bar);
        }
    }
    // the queue behind link 5 is noticed at first, then drivers spread out
    assert!(above > 0 && below > 0);
}

/// Two identical branches after the sign: following never saves anything.
fn symmetric_diamond() -> ScenarioInputs {
    let link = |id: &str, from: &str, to: &str| RawLink {
        id: id.into(),
        from: from.into(),
        to: to.into(),
        length_m: 500.0,
        vf_mps: 12.5,
        cap_vps: 0.5,
        kjam_vpm: 0.15,
        w_mps: 5.0,
    };
    let mut inputs = fig1();
    inputs.network = RawNetwork {
        nodes: ["a", "b", "c", "d", "e"].iter().map(|&n| RawNode { id: n.into() }).collect(),
        links: vec![
            link("1", "a", "b"),
            link("2", "b", "c"),
            link("3", "b", "d"),
            link("4", "c", "e"),
            link("5", "d", "e"),
        ],
        junctions: Vec::new(),
    };
    inputs.paths = vec![
        RawPath { id: "nf".into(), od: "od1".into(), links: vec!["1".into(), "2".into(), "4".into()] },
        RawPath { id: "f".into(), od: "od1".into(), links: vec!["1".into(), "3".into(), "5".into()] },
    ];
    inputs.demand = vec![DemandRow {
        od_id: "od1".into(),
        origin: "a".into(),
        destination: "e".into(),
        demand: 100.0,
        desired_arrival: 2100.0,
    }];
    inputs.tolerances.clear();
    inputs.config.default_epsilon = 60.0;
    inputs.signs = vec![RawSign {
        id: "vms".into(),
        host_link: "1".into(),
        junction: "b".into(),
        from_link: "2".into(),
        to_link: "3".into(),
        omega: vec![[600.0, 2400.0]],
    }];
    inputs
}

#[test]
fn zero_saving_keeps_compliance_at_one_half() {
    let mut inputs = symmetric_diamond();
    inputs.config.solver.max_days = 20;
    let out = run_day_to_day(&inputs.validate().unwrap(), None).unwrap();
    for d in &out.days {
        let c = &d.compliance[0];
        let Perception::Saving { x } = c.perception else { panic!("saving model") };
        assert!(x.abs() < 1e-9);
        assert!((c.cr - 0.5).abs() < 1e-12);
    }
}

#[test]
fn compliance_stays_strictly_inside_unit_interval() {
    for model in [ComplianceModel::I, ComplianceModel::II, ComplianceModel::III, ComplianceModel::IV] {
        let mut inputs = fig1();
        inputs.config.compliance.model = model;
        inputs.config.compliance.beta = 0.1;
        inputs.config.compliance.beta_model_iv = 0.1;
        inputs.config.solver.max_days = 30;
        let out = run_day_to_day(&inputs.validate().unwrap(), None).unwrap();
        for d in &out.days {
            for c in &d.compliance {
                assert!(c.cr > 0.0 && c.cr < 1.0 && c.next_cr > 0.0 && c.next_cr < 1.0, "{model}: {}", c.cr);
            }
        }
    }
}
