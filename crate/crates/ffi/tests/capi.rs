//! Exercises the C entry points the way a foreign caller would.

use std::ffi::{CStr, CString};
use std::ptr;

use kgem_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(kgem_last_error()).to_string_lossy().into_owned() }
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

const TRAIN_CONFIG: &str = "loss = aml-exp\ngamma = 2\nnorm = l2\ndim = 8\nbatch = 16\nmax_iter = 300\neval_every = 100\nlr = 0.1\nnormalize = false\nseed = 3\n";

#[test]
fn generate_train_score_evaluate_save_load() {
    unsafe {
        let mut ds: *mut KgemDataset = ptr::null_mut();
        let status = kgem_dataset_generate(c("clustered").as_ptr(), 30, 3, 1.0, 7, &mut ds);
        assert_eq!(status, KGEM_OK, "{}", last_error());
        assert_eq!(kgem_dataset_num_entities(ds), 30);
        assert_eq!(kgem_dataset_num_relations(ds), 3);
        let total = kgem_dataset_num_train(ds) + kgem_dataset_num_valid(ds) + kgem_dataset_num_test(ds);
        assert_eq!(total, 60); // 15 blocks of four pairs

        let mut model: *mut KgemModel = ptr::null_mut();
        let config = c(TRAIN_CONFIG);
        let status = kgem_train(ds, config.as_ptr(), &mut model);
        assert_eq!(status, KGEM_OK, "{}", last_error());

        let mut slack = f64::NAN;
        assert_eq!(kgem_model_slack(model, &mut slack), KGEM_OK);
        assert!(slack.is_finite());

        let mut score = f64::NAN;
        let status = kgem_model_score(model, c("e0").as_ptr(), c("r0").as_ptr(), c("e2").as_ptr(), &mut score);
        assert_eq!(status, KGEM_OK, "{}", last_error());
        assert!(score.is_finite() && score >= 0.0);

        let mut metrics = KgemMetrics::default();
        let status = kgem_evaluate(model, ds, 10, &mut metrics);
        assert_eq!(status, KGEM_OK, "{}", last_error());
        assert!(metrics.mean_rank_filtered <= metrics.mean_rank_raw);
        assert!(metrics.hits_at_k_filtered >= metrics.hits_at_k_raw);
        assert!(metrics.mean_rank_raw >= 1.0);

        let dir = tempfile::tempdir().unwrap();
        let path = c(dir.path().join("model.ckpt").to_str().unwrap());
        assert_eq!(kgem_model_save(model, path.as_ptr()), KGEM_OK, "{}", last_error());

        let mut reloaded: *mut KgemModel = ptr::null_mut();
        assert_eq!(kgem_model_load(path.as_ptr(), &mut reloaded), KGEM_OK, "{}", last_error());
        let mut score2 = f64::NAN;
        let status = kgem_model_score(reloaded, c("e0").as_ptr(), c("r0").as_ptr(), c("e2").as_ptr(), &mut score2);
        assert_eq!(status, KGEM_OK);
        assert_eq!(score.to_bits(), score2.to_bits(), "reloaded model scores differ");

        kgem_model_free(reloaded);
        kgem_model_free(model);
        kgem_dataset_free(ds);
    }
}

#[test]
fn dataset_files_round_trip_through_the_loader() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("train.txt"), "a\tr\tb\nb\tr\tc\n").unwrap();
    std::fs::write(dir.path().join("test.txt"), "c\tr\ta\n").unwrap();
    unsafe {
        let train = c(dir.path().join("train.txt").to_str().unwrap());
        let test = c(dir.path().join("test.txt").to_str().unwrap());
        let mut ds: *mut KgemDataset = ptr::null_mut();
        let status = kgem_dataset_load(train.as_ptr(), ptr::null(), test.as_ptr(), &mut ds);
        assert_eq!(status, KGEM_OK, "{}", last_error());
        assert_eq!(kgem_dataset_num_entities(ds), 3);
        assert_eq!(kgem_dataset_num_train(ds), 2);
        assert_eq!(kgem_dataset_num_valid(ds), 0);
        assert_eq!(kgem_dataset_num_test(ds), 1);
        kgem_dataset_free(ds);
    }
}

#[test]
fn errors_set_codes_and_messages() {
    unsafe {
        // null output pointer
        assert_eq!(
            kgem_dataset_generate(c("chain").as_ptr(), 5, 1, 1.0, 0, ptr::null_mut()),
            KGEM_ERR_NULL_ARGUMENT
        );
        assert!(last_error().contains("out"));

        // unknown generator name
        let mut ds: *mut KgemDataset = ptr::null_mut();
        assert_eq!(
            kgem_dataset_generate(c("fractal").as_ptr(), 5, 1, 1.0, 0, &mut ds),
            KGEM_ERR_CONFIG
        );
        assert!(last_error().contains("fractal"));

        // degenerate spec
        assert_eq!(
            kgem_dataset_generate(c("chain").as_ptr(), 1, 1, 1.0, 0, &mut ds),
            KGEM_ERR_CONFIG
        );

        // missing checkpoint file
        let mut model: *mut KgemModel = ptr::null_mut();
        assert_eq!(kgem_model_load(c("/no/such/file.ckpt").as_ptr(), &mut model), KGEM_ERR_DATA);

        // config without a loss
        assert_eq!(kgem_dataset_generate(c("chain").as_ptr(), 20, 2, 1.0, 0, &mut ds), KGEM_OK);
        assert_eq!(kgem_train(ds, c("dim = 4\n").as_ptr(), &mut model), KGEM_ERR_CONFIG);
        assert!(last_error().contains("loss"), "{}", last_error());

        // unknown label after training
        assert_eq!(kgem_train(ds, c("loss = mrl\ngamma = 1\ndim = 4\nmax_iter = 20\n").as_ptr(), &mut model), KGEM_OK, "{}", last_error());
        let mut score = 0.0f64;
        assert_eq!(
            kgem_model_score(model, c("nobody").as_ptr(), c("r0").as_ptr(), c("e1").as_ptr(), &mut score),
            KGEM_ERR_DATA
        );
        assert!(last_error().contains("nobody"));

        kgem_model_free(model);
        kgem_dataset_free(ds);

        // freeing null handles is a no-op
        kgem_dataset_free(ptr::null_mut());
        kgem_model_free(ptr::null_mut());
    }
}
