//! Fast end-to-end sanity runs of the study harness at reduced replicate
//! counts. The full-scale statistical gates live in the acceptance suite;
//! these runs catch gross regressions in minutes of CPU, not tens.

use depthgram::synth::{run_study, Model, StudyConfig};

fn quick_study(model: Model, c: f64, replicates: usize, marginal: bool) -> StudyConfig {
    StudyConfig {
        model,
        n: 100,
        p: 50,
        n_points: 100,
        c_grid: vec![c],
        replicates,
        seed: 0xD5,
        fence_factor: 1.5,
        marginal_rule: marginal,
        collect_points: false,
    }
}

#[test]
fn joint_outliers_dominate_detection_at_full_contamination() {
    let output = run_study(&quick_study(Model::One, 1.0, 10, false)).unwrap();
    let row = &output.summary.rows[0];
    assert!(
        row.depthgram.joint.mean >= 0.9,
        "joint detection {:?}",
        row.depthgram.joint
    );
    assert!(
        row.depthgram.shape.mean >= 0.8,
        "shape detection {:?}",
        row.depthgram.shape
    );
    assert!(
        row.depthgram.false_rate.mean <= 0.05,
        "false rate {:?}",
        row.depthgram.false_rate
    );
}

#[test]
fn linear_model_magnitude_outliers_are_found() {
    let output = run_study(&quick_study(Model::Two, 1.0, 10, false)).unwrap();
    let row = &output.summary.rows[0];
    assert!(
        row.depthgram.magnitude.mean >= 0.9,
        "magnitude detection {:?}",
        row.depthgram.magnitude
    );
    assert!(
        row.depthgram.joint.mean >= 0.9,
        "joint detection {:?}",
        row.depthgram.joint
    );
}

#[test]
fn clean_data_false_rate_stays_low() {
    let output = run_study(&quick_study(Model::One, 0.0, 10, false)).unwrap();
    let row = &output.summary.rows[0];
    assert!(
        row.depthgram.false_rate.mean <= 0.05,
        "false rate {:?}",
        row.depthgram.false_rate
    );
}

#[test]
fn marginal_screens_separate_magnitude_and_shape() {
    let output = run_study(&quick_study(Model::One, 1.0, 5, true)).unwrap();
    let marginal = output.summary.rows[0].marginal.as_ref().unwrap();
    assert!(
        marginal.magnitude_correct.mean >= 0.95,
        "magnitude screen {:?}",
        marginal.magnitude_correct
    );
    assert!(
        marginal.shape_correct.mean >= 0.7,
        "shape screen {:?}",
        marginal.shape_correct
    );
    assert!(
        marginal.magnitude_false.mean <= 0.05,
        "magnitude false {:?}",
        marginal.magnitude_false
    );
    assert!(
        marginal.shape_false.mean <= 0.08,
        "shape false {:?}",
        marginal.shape_false
    );
}
