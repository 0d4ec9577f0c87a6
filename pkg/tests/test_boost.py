import numpy as np
import pytest

from ssqp.boost import (
    ModelFormatError,
    ModelVersionError,
    TrainingRow,
    TrainingSet,
    load_model,
    save_model,
    train_ssqp,
)
from ssqp.pipeline import GROUPS, ExtractionConfig, FeatureGroupSet, extract_features
from ssqp.imgproc import GrayImage
from ssqp.svr import SvrHyperparams
from ssqp.evaluation import pcc

HYPER = SvrHyperparams(C_grid=(1.0, 32.0), gamma_grid=(0.5, 4.0), cv_folds=3)


def _toy_row(rng, content):
    vec = rng.uniform(0.0, 1.0, 20)
    mos = 20.0 * float(vec[9:12].mean())  # driven by the svd_f4 group
    return TrainingRow(features=FeatureGroupSet.from_vector(vec), mos=mos, content_id=content)


def _toy_set(n_contents=8, per_content=6, seed=0):
    rng = np.random.default_rng(seed)
    rows = [
        _toy_row(rng, f"c{c:02d}")
        for c in range(n_contents)
        for _ in range(per_content)
    ]
    return TrainingSet(rows=rows)


def test_training_set_validation():
    with pytest.raises(ValueError):
        TrainingRow(features=FeatureGroupSet.from_vector(np.zeros(20)), mos=np.nan, content_id="a")
    with pytest.raises(ValueError):
        TrainingRow(features=FeatureGroupSet.from_vector(np.zeros(20)), mos=1.0, content_id="")


def test_train_requires_contents_and_rows():
    rng = np.random.default_rng(1)
    single = TrainingSet(rows=[_toy_row(rng, "only") for _ in range(6)])
    with pytest.raises(ValueError):
        train_ssqp(single, HYPER, seed=0)
    tiny = TrainingSet(rows=[_toy_row(rng, "a"), _toy_row(rng, "b")])
    with pytest.raises(ValueError):
        train_ssqp(tiny, HYPER, seed=0)


def test_monotone_synthetic_end_to_end():
    data = _toy_set(n_contents=10, per_content=6, seed=2)
    train = data.subset([c for c in data.content_ids()[:8]])
    held = data.subset(data.content_ids()[8:])
    model = train_ssqp(train, HYPER, seed=3)
    pred = np.array([model.predict_from_features(r.features) for r in held.rows])
    mos = np.array([r.mos for r in held.rows])
    assert pcc(pred, mos) > 0.95


def test_constant_mos_predicts_constant():
    rng = np.random.default_rng(4)
    rows = [
        TrainingRow(features=FeatureGroupSet.from_vector(rng.uniform(0, 1, 20)),
                    mos=7.5, content_id=f"c{i % 3}")
        for i in range(9)
    ]
    model = train_ssqp(TrainingSet(rows=rows), HYPER, seed=0)
    probe = FeatureGroupSet.from_vector(rng.uniform(0, 1, 20))
    assert model.predict_from_features(probe) == 7.5


def test_stage_composition_matches_manual_chaining():
    data = _toy_set(seed=5)
    model = train_ssqp(data, HYPER, seed=1)
    row = data.rows[7]
    s1 = np.array([model.stage1[g].predict(row.features.groups[g]) for g in GROUPS])
    s2 = np.array([model.stage2_svd.predict(s1[:4]), model.stage2_hist.predict(s1[4:])])
    manual = model.stage3.predict(s2)
    assert model.predict_from_features(row.features) == manual


def test_boosting_non_degradation_on_controlled_set():
    # Ground truth spread over one structural and one statistical group: no
    # single stage-I regressor sees everything, the fused stages must not
    # lose to the best of them.
    rng = np.random.default_rng(6)
    rows = []
    for c in range(10):
        for _ in range(6):
            vec = rng.uniform(0.0, 1.0, 20)
            mos = 10.0 * (float(vec[9:12].mean()) + float(vec[13]))  # svd_f4 + hist_f2
            rows.append(TrainingRow(features=FeatureGroupSet.from_vector(vec),
                                    mos=mos, content_id=f"c{c:02d}"))
    model = train_ssqp(TrainingSet(rows=rows), HYPER, seed=2)
    stage1_rmse = min(np.sqrt(model.stage1[g].cv_mse) for g in GROUPS)
    stage3_rmse = np.sqrt(model.stage3.cv_mse)
    assert stage3_rmse <= stage1_rmse * 1.1 + 1e-9


def test_row_order_invariance():
    data = _toy_set(seed=7)
    shuffled = list(data.rows)
    np.random.default_rng(99).shuffle(shuffled)
    a = train_ssqp(data, HYPER, seed=4)
    b = train_ssqp(TrainingSet(rows=shuffled), HYPER, seed=4)
    probe = data.rows[0].features
    assert a.predict_from_features(probe) == b.predict_from_features(probe)


def test_same_seed_serializes_identically(tmp_path):
    data = _toy_set(seed=8)
    p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
    save_model(train_ssqp(data, HYPER, seed=11), p1)
    save_model(train_ssqp(data, HYPER, seed=11), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_save_load_roundtrip_predicts_identically(tmp_path):
    rng = np.random.default_rng(9)
    data = _toy_set(seed=9)
    model = train_ssqp(data, HYPER, seed=5)
    path = tmp_path / "model.json"
    save_model(model, path)
    back = load_model(path)
    for _ in range(10):
        probe = FeatureGroupSet.from_vector(rng.uniform(0, 1, 20))
        assert model.predict_from_features(probe) == back.predict_from_features(probe)
    assert back.extraction_config == model.extraction_config


def test_load_rejects_truncated_file(tmp_path):
    data = _toy_set(seed=10)
    path = tmp_path / "model.json"
    save_model(train_ssqp(data, HYPER, seed=6), path)
    blob = path.read_bytes()
    path.write_bytes(blob[: len(blob) // 2])
    with pytest.raises(ModelFormatError):
        load_model(path)


def test_load_rejects_version_mismatch(tmp_path):
    data = _toy_set(seed=11)
    path = tmp_path / "model.json"
    save_model(train_ssqp(data, HYPER, seed=7), path)
    text = path.read_text().replace('"schema_version":1', '"schema_version":2')
    path.write_text(text)
    with pytest.raises(ModelVersionError) as err:
        load_model(path)
    assert "2" in str(err.value) and "1" in str(err.value)


def test_out_of_fold_stacking_runs():
    data = _toy_set(n_contents=6, per_content=5, seed=12)
    model = train_ssqp(data, HYPER, seed=8, stacking="out_of_fold")
    assert model.stacking == "out_of_fold"
    val = model.predict_from_features(data.rows[0].features)
    assert np.isfinite(val)


def test_predict_ssqp_runs_on_images():
    from ssqp.boost import predict_ssqp

    rng = np.random.default_rng(13)
    cfg = ExtractionConfig(mode="block_average")
    rows = []
    for c in range(3):
        ref = GrayImage(rng.uniform(0, 255, (20, 20)))
        for _ in range(3):
            test = GrayImage(np.clip(ref.pixels + rng.normal(0, rng.uniform(1, 40), (20, 20)), 0, 255))
            feats = extract_features(ref, test, cfg)
            mos = rng.uniform(0, 20)
            rows.append(TrainingRow(features=feats, mos=mos, content_id=f"c{c}"))
    model = train_ssqp(TrainingSet(rows=rows), HYPER, seed=9, extraction_config=cfg)
    ref = GrayImage(rng.uniform(0, 255, (20, 20)))
    test = GrayImage(np.clip(ref.pixels + rng.normal(0, 5, (20, 20)), 0, 255))
    a = predict_ssqp(model, ref, test)
    b = predict_ssqp(model, ref, test)
    assert a == b and np.isfinite(a)


def test_trained_model_respects_distortion_order():
    # Train on graded synthetic distortions where pristine pairs carry the
    # top score: an unseen identity pair must land in the top decile of the
    # training score range, and a light distortion must outscore a heavy one.
    from ssqp.boost import predict_ssqp
    from ssqp.synthetic import distort, make_synthetic_pairs, make_texture

    cfg = ExtractionConfig(mode="block_average")
    rows = []
    for content_id, ref, test, mos in make_synthetic_pairs(n_contents=8, size=32):
        rows.append(TrainingRow(features=extract_features(ref, test, cfg),
                                mos=mos, content_id=content_id))
    model = train_ssqp(TrainingSet(rows=rows), HYPER, seed=10, extraction_config=cfg)

    held_ref = make_texture(97, size=32)
    rng = np.random.default_rng(97)
    identity_score = predict_ssqp(model, held_ref, held_ref)
    light = distort(held_ref, "noise", 0.25, rng)
    heavy = distort(held_ref, "noise", 1.0, rng)
    mos_values = [r.mos for r in rows]
    top_decile = np.quantile(mos_values, 0.9)
    assert identity_score >= top_decile
    assert predict_ssqp(model, held_ref, light) > predict_ssqp(model, held_ref, heavy)
