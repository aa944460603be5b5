use std::path::Path;

use noma_lab::codebook::load_codebooks;
use noma_lab::config::RunConfig;
use noma_lab::harness::RunOptions;
use noma_lab::Error;

fn data(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

#[test]
fn bundled_configs_prepare() {
    for name in ["scma_simo.json", "dcma_gamma.json", "dcma_smx.json", "scma_cee.json"] {
        let cfg = RunConfig::load(&data(name), &[]).unwrap_or_else(|e| panic!("{name}: {e}"));
        cfg.prepare().unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn bundled_codebooks_load() {
    for name in ["scma_6x4_m4.json", "dcma_6x4_m4.json", "dcma_10x5_m4.json", "spreading_6x4_m4.json"] {
        let set = load_codebooks(&data(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(set.order(), 4);
    }
    assert!(matches!(load_codebooks(&data("bad_energy.json")), Err(Error::Invariant(_))));
}

#[test]
fn overrides_change_the_run() {
    let cfg = RunConfig::load(&data("scma_cee.json"), &["trials=40".into(), "values=[0,0.5]".into()]).unwrap();
    let out = cfg.run(&RunOptions { workers: 2, record_timing: false }).unwrap();
    let curve = &out.result.curves[0];
    assert_eq!(curve.points.len(), 2);
    assert!(curve.points.iter().all(|p| p.trials == 40));
}

#[test]
fn mismatched_system_is_rejected() {
    let err = RunConfig::load(&data("scma_simo.json"), &["system.J=5".into()])
        .unwrap()
        .prepare()
        .unwrap_err();
    assert!(err.is_input_error(), "{err}");
}
