import numpy as np
import pytest

from storyrank import models as md
from storyrank.dataset import BacklogItem
from storyrank.features import EmbeddingMatrix
from storyrank.pairing import ComparativePair, PairSet, simulate_pairs

from helpers import make_items


def head_of(w, b=0.0):
    return md.ScoringHead(w=np.asarray(w, dtype=np.float64), b=b)


class TestScore:
    def test_zero_head(self):
        assert md.score(head_of([0, 0]), [3.0, 4.0]) == 0.0

    def test_hand_value(self):
        assert md.score(head_of([1, 2], b=0.5), [3.0, -1.0]) == pytest.approx(1.5)

    def test_linearity_in_x(self):
        h = head_of([0.3, -0.7], b=2.0)
        x = np.array([1.5, 2.5])
        for alpha in (0.0, 2.0, -3.5):
            assert md.score(h, alpha * x) == pytest.approx(alpha * float(h.w @ x) + 2.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="dimension"):
            md.score(head_of([1, 2]), [1.0])

    def test_score_many_matches_score(self):
        h = head_of([0.2, -0.4], b=1.0)
        X = np.array([[1.0, 2.0], [0.0, 0.0], [-1.0, 3.0]])
        many = md.score_many(h, X)
        assert many.tolist() == pytest.approx([md.score(h, x) for x in X])


class TestComparativeForward:
    def test_identical_inputs(self):
        h = head_of([1, 2, 3], b=9.0)
        x = np.array([0.1, 0.2, 0.3])
        assert md.comparative_forward(h, x, x) == 0.0

    def test_antisymmetric(self):
        h = head_of([0.5, -1.0], b=4.0)
        a, b = np.array([1.0, 0.0]), np.array([0.0, 1.0])
        assert md.comparative_forward(h, a, b) == -md.comparative_forward(h, b, a)

    def test_bias_cancels(self):
        for bias in (0.0, 7.0, -3.0):
            h = head_of([1.0], b=bias)
            assert md.comparative_forward(h, [2.0], [0.5]) == pytest.approx(1.5)


class TestHingeLoss:
    def test_values(self):
        assert md.hinge_loss(1, 0.5) == pytest.approx(0.5)
        assert md.hinge_loss(1, 1.2) == 0.0
        assert md.hinge_loss(-1, 0.3) == pytest.approx(1.3)

    def test_label_validated(self):
        with pytest.raises(ValueError):
            md.hinge_loss(0, 1.0)


def central_diff(fn, w, eps=1e-6):
    grad = np.zeros_like(w)
    for i in range(w.size):
        up, dn = w.copy(), w.copy()
        up[i] += eps
        dn[i] -= eps
        grad[i] = (fn(up) - fn(dn)) / (2 * eps)
    return grad


class TestBatchGradients:
    def test_comparative_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            n, dim = 8, 5
            d = rng.standard_normal((n, dim))
            y = rng.choice([-1.0, 1.0], size=n)
            w = rng.standard_normal(dim)
            margins = 1.0 - y * (d @ w)
            if np.any(np.abs(margins) < 1e-3):
                continue  # stay away from kinks
            loss, grad = md.comparative_batch(w, d, y)
            num = central_diff(lambda v: md.comparative_batch(v, d, y)[0], w)
            assert np.allclose(grad, num, rtol=1e-4, atol=1e-7)

    def test_comparative_l2_term(self):
        w = np.array([1.0, -2.0])
        d = np.array([[0.0, 0.0]])
        y = np.array([1.0])
        # zero difference vector: hinge fixed at 1, only the penalty varies
        loss0, grad0 = md.comparative_batch(w, d, y, l2=0.0)
        loss1, grad1 = md.comparative_batch(w, d, y, l2=0.1)
        assert loss0 == pytest.approx(1.0)
        assert grad0.tolist() == [0.0, 0.0]
        assert loss1 == pytest.approx(1.0 + 0.1 * 5.0)
        assert grad1.tolist() == pytest.approx([0.2, -0.4])

    def test_reversed_pair_same_loss(self):
        rng = np.random.default_rng(1)
        w = rng.standard_normal(4)
        d = rng.standard_normal((1, 4))
        y = np.array([1.0])
        loss_fwd, _ = md.comparative_batch(w, d, y)
        loss_rev, _ = md.comparative_batch(w, -d, -y)
        assert loss_fwd == pytest.approx(loss_rev, abs=1e-15)

    def test_regression_matches_finite_differences(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            n, dim = 10, 4
            X = rng.standard_normal((n, dim))
            sp = rng.uniform(1, 9, size=n)
            w = rng.standard_normal(dim)
            b = float(rng.standard_normal())
            if np.any(np.abs(sp - (X @ w + b)) < 1e-3):
                continue
            loss, grad_w, grad_b = md.regression_batch(w, b, X, sp)
            num_w = central_diff(lambda v: md.regression_batch(v, b, X, sp)[0], w)
            num_b = central_diff(lambda v: md.regression_batch(w, float(v[0]), X, sp)[0],
                                 np.array([b]))
            assert np.allclose(grad_w, num_w, rtol=1e-4, atol=1e-7)
            assert grad_b == pytest.approx(float(num_b[0]), rel=1e-4, abs=1e-7)


class TestTrainConfig:
    def test_defaults_per_regime(self):
        reg = md.default_config(md.LOSS_REGRESSION)
        assert (reg.max_epochs, reg.patience) == (600, None)
        noval = md.default_config(md.LOSS_COMPARATIVE)
        assert (noval.max_epochs, noval.patience) == (100, None)
        val = md.default_config(md.LOSS_COMPARATIVE, with_validation=True)
        assert (val.max_epochs, val.patience) == (300, 20)
        svm = md.default_config(md.LOSS_SVM)
        assert (svm.max_epochs, svm.l2_penalty) == (100, 1e-4)
        for cfg in (reg, noval, val, svm):
            assert (cfg.lr_start, cfg.lr_end, cfg.batch_size) == (1e-3, 1e-6, 32)
            assert cfg.optimizer == "adam"

    def test_overrides(self):
        cfg = md.default_config(md.LOSS_COMPARATIVE, max_epochs=5, seed=9)
        assert cfg.max_epochs == 5 and cfg.seed == 9

    def test_validation(self):
        with pytest.raises(ValueError):
            md.TrainConfig(loss="nope", max_epochs=1)
        with pytest.raises(ValueError):
            md.TrainConfig(loss=md.LOSS_COMPARATIVE, max_epochs=1, lr_start=1e-6, lr_end=1e-3)
        with pytest.raises(ValueError):
            md.TrainConfig(loss=md.LOSS_COMPARATIVE, max_epochs=1, batch_size=0)
        with pytest.raises(ValueError):
            md.TrainConfig(loss=md.LOSS_COMPARATIVE, max_epochs=1, optimizer="lbfgs")
        with pytest.raises(ValueError):
            md.TrainConfig(loss=md.LOSS_COMPARATIVE, max_epochs=1, patience=0)


class TestLrSchedule:
    def test_endpoints(self):
        cfg = md.default_config(md.LOSS_COMPARATIVE)  # 100 epochs
        assert md.lr_for_epoch(cfg, 0) == pytest.approx(1e-3)
        assert md.lr_for_epoch(cfg, 99) == pytest.approx(1e-6)

    def test_geometric_midpoint(self):
        cfg = md.default_config(md.LOSS_COMPARATIVE, max_epochs=3)
        assert md.lr_for_epoch(cfg, 1) == pytest.approx(np.sqrt(1e-3 * 1e-6))

    def test_monotone_decreasing(self):
        cfg = md.default_config(md.LOSS_REGRESSION)
        lrs = [md.lr_for_epoch(cfg, t) for t in range(600)]
        assert all(a > b for a, b in zip(lrs, lrs[1:]))

    def test_single_epoch(self):
        cfg = md.default_config(md.LOSS_COMPARATIVE, max_epochs=1)
        assert md.lr_for_epoch(cfg, 0) == 1e-3


def embeddings_for(items, dim=6, seed=0):
    rng = np.random.default_rng(seed)
    return EmbeddingMatrix(dim=dim, vectors={it.id: rng.standard_normal(dim) for it in items})


class TestTrainComparative:
    def test_zero_epochs_returns_initialization(self):
        items = make_items([1, 2, 3, 5])
        emb = embeddings_for(items)
        pairs = simulate_pairs(items, k=1, seed=0)
        trained = md.train_comparative(pairs, emb, None,
                                       md.default_config(md.LOSS_COMPARATIVE, max_epochs=0))
        assert not trained.head.w.any()
        assert trained.head.b == 0.0
        assert trained.best_epoch == -1
        assert len(trained.history.train_loss) == 0

    def test_bias_never_moves(self):
        items = make_items([1, 2, 3, 5, 8, 13])
        emb = embeddings_for(items)
        pairs = simulate_pairs(items, k=2, seed=1)
        trained = md.train_comparative(pairs, emb, None,
                                       md.default_config(md.LOSS_COMPARATIVE, max_epochs=30))
        assert trained.head.b == 0.0
        assert np.float64(trained.head.b).hex() == np.float64(0.0).hex()

    def test_separable_pairs_reach_near_zero_loss(self):
        # 1-d features spaced 200 apart: w*=0.02 puts every margin at
        # >= 0.02*200 = 4 >= 1, so brute-force loss at w* is exactly 0
        items = make_items([1, 2, 3, 4, 5, 6])
        emb = EmbeddingMatrix(dim=1, vectors={
            it.id: np.array([200.0 * i]) for i, it in enumerate(items)})
        pairs = simulate_pairs(items, k=2, seed=0)
        d = np.array([emb.get(p.id_a)[0] - emb.get(p.id_b)[0] for p in pairs.pairs])
        y = np.array([p.y for p in pairs.pairs], dtype=np.float64)
        oracle_losses = np.maximum(0.0, 1.0 - y * (d * 0.02))
        assert oracle_losses.max() == 0.0

        trained = md.train_comparative(pairs, emb, None, md.default_config(md.LOSS_COMPARATIVE))
        assert trained.history.train_loss[-1] < 0.01

    def test_early_stopping_stops_and_restores_best(self):
        items = make_items([1, 2, 3, 5, 8, 13, 21, 34])
        train_items, val_items = items[:6], items[6:]
        emb = embeddings_for(items, dim=4, seed=2)
        pairs = simulate_pairs(train_items, k=2, seed=0)
        val_pairs = simulate_pairs(val_items, k=1, seed=7)
        cfg = md.default_config(md.LOSS_COMPARATIVE, with_validation=True,
                                max_epochs=300, patience=5)
        trained = md.train_comparative(pairs, emb, val_pairs, cfg)
        n_epochs = len(trained.history.train_loss)
        assert trained.history.val_loss is not None
        assert len(trained.history.val_loss) == n_epochs
        assert trained.best_epoch == int(np.argmin(trained.history.val_loss))
        if n_epochs < 300:  # stopped early
            assert n_epochs - trained.best_epoch >= 5
        # restored head reproduces the best validation loss
        d_val = np.stack([emb.get(p.id_a) - emb.get(p.id_b) for p in val_pairs.pairs])
        y_val = np.array([p.y for p in val_pairs.pairs], dtype=np.float64)
        loss_at_head, _ = md.comparative_batch(trained.head.w, d_val, y_val)
        assert loss_at_head == pytest.approx(min(trained.history.val_loss), abs=1e-12)

    def test_patience_requires_validation_pairs(self):
        items = make_items([1, 2, 3])
        emb = embeddings_for(items)
        pairs = simulate_pairs(items, k=1, seed=0)
        cfg = md.default_config(md.LOSS_COMPARATIVE, patience=3)
        with pytest.raises(ValueError, match="validation"):
            md.train_comparative(pairs, emb, None, cfg)

    def test_empty_pairs_rejected(self):
        emb = EmbeddingMatrix(dim=1, vectors={})
        with pytest.raises(ValueError, match="empty pair set"):
            md.train_comparative(PairSet(pairs=(), k=1, dropped=2), emb)

    def test_wrong_loss_rejected(self):
        items = make_items([1, 2])
        pairs = simulate_pairs(items, k=1, seed=0)
        with pytest.raises(ValueError, match="requires loss"):
            md.train_comparative(pairs, embeddings_for(items),
                                 config=md.default_config(md.LOSS_REGRESSION))

    def test_accepts_plain_pair_list(self):
        items = make_items([1, 2, 3])
        emb = embeddings_for(items)
        pairs = [ComparativePair("I0", "I2", -1), ComparativePair("I2", "I0", +1)]
        trained = md.train_comparative(pairs, emb, None,
                                       md.default_config(md.LOSS_COMPARATIVE, max_epochs=2))
        assert len(trained.history.train_loss) == 2

    def test_deterministic(self):
        items = make_items([1, 2, 3, 5, 8])
        emb = embeddings_for(items)
        pairs = simulate_pairs(items, k=2, seed=3)
        cfg = md.default_config(md.LOSS_COMPARATIVE, max_epochs=10, seed=4)
        a = md.train_comparative(pairs, emb, None, cfg)
        b = md.train_comparative(pairs, emb, None, cfg)
        assert np.array_equal(a.head.w, b.head.w)
        assert a.history.train_loss == b.history.train_loss


class TestTrainRegression:
    def test_zero_epochs(self):
        items = make_items([1, 2])
        trained = md.train_regression(items, embeddings_for(items),
                                      md.default_config(md.LOSS_REGRESSION, max_epochs=0))
        assert not trained.head.w.any() and trained.head.b == 0.0

    def test_single_zero_item_moves_only_bias(self):
        # x = 0 makes this a 1-parameter problem; a line search over b
        # confirms the optimum sits at b = sp
        sp = 0.15
        items = [BacklogItem(id="solo", title="", description="", story_point=sp,
                             split="train")]
        emb = EmbeddingMatrix(dim=3, vectors={"solo": np.zeros(3)})
        grid = np.linspace(-1, 1, 2001)
        line_search_best = grid[np.argmin(np.abs(sp - grid))]
        assert line_search_best == pytest.approx(sp, abs=1e-3)

        trained = md.train_regression(items, emb, md.default_config(md.LOSS_REGRESSION))
        assert not trained.head.w.any()  # zero input -> zero weight gradient
        assert abs(trained.head.b - sp) < 0.1

    def test_identical_targets_reach_constant_predictor(self):
        # global minimum is (w=0, b=c) with loss exactly 0
        c = 0.05
        items = make_items([c] * 6)
        shared = np.array([0.7, -0.4, 0.0])
        emb = EmbeddingMatrix(dim=3, vectors={it.id: shared.copy() for it in items})
        X = emb.stack(it.id for it in items)
        brute_loss, _, _ = md.regression_batch(np.zeros(3), c, X, np.full(6, c))
        assert brute_loss == 0.0

        trained = md.train_regression(items, emb, md.default_config(md.LOSS_REGRESSION))
        # the feature coordinate the data never touches receives no gradient
        assert trained.head.w[2] == 0.0
        preds = md.score_many(trained.head, X)
        assert np.all(np.abs(preds - c) < 0.02)
        assert trained.history.train_loss[-1] < 0.02

    def test_unlabeled_rejected(self):
        items = [md.BacklogItem(id="A", title="", description="", story_point=None,
                                split="train")]
        with pytest.raises(ValueError, match="story points"):
            md.train_regression(items, EmbeddingMatrix(dim=1, vectors={"A": np.zeros(1)}))

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            md.train_regression([], EmbeddingMatrix(dim=1, vectors={}))


class TestTrainSvmComparative:
    def test_bias_is_exactly_zero(self):
        items = make_items([1, 2, 3, 5])
        pairs = simulate_pairs(items, k=1, seed=0)
        trained = md.train_svm_comparative(pairs, embeddings_for(items),
                                           md.default_config(md.LOSS_SVM, max_epochs=5))
        assert trained.head.b == 0.0

    def test_separable_pairs_reach_near_zero_loss(self):
        # same construction as the comparative case; penalty at w*=0.02 is
        # l2 * w*^2 = 1e-4 * 4e-4, negligible
        items = make_items([1, 2, 3, 4, 5, 6])
        emb = EmbeddingMatrix(dim=1, vectors={
            it.id: np.array([200.0 * i]) for i, it in enumerate(items)})
        pairs = simulate_pairs(items, k=2, seed=0)
        trained = md.train_svm_comparative(pairs, emb, md.default_config(md.LOSS_SVM))
        assert trained.history.train_loss[-1] < 0.01

    def test_item_scores_factor_through_differences(self):
        # training sees only x_a - x_b, yet w.x ranks single items
        items = make_items([1, 3, 8, 13, 21])
        emb = embeddings_for(items, dim=4, seed=11)
        pairs = simulate_pairs(items, k=3, seed=2)
        trained = md.train_svm_comparative(pairs, emb,
                                           md.default_config(md.LOSS_SVM, max_epochs=50))
        scores = md.predict_scores(trained, emb, [it.id for it in items])
        assert len(scores) == 5


class TestPredictScores:
    def test_empty_ids(self):
        h = md.TrainedModel(head=head_of([1.0]), config=md.default_config(md.LOSS_COMPARATIVE),
                            history=md.TrainingHistory(train_loss=()), best_epoch=-1)
        assert md.predict_scores(h, EmbeddingMatrix(dim=1, vectors={}), []) == []

    def test_order_follows_ids(self):
        emb = EmbeddingMatrix(dim=1, vectors={"A": np.array([1.0]), "B": np.array([2.0])})
        model = md.TrainedModel(head=head_of([2.0], b=1.0),
                                config=md.default_config(md.LOSS_COMPARATIVE),
                                history=md.TrainingHistory(train_loss=()), best_epoch=-1)
        assert md.predict_scores(model, emb, ["B", "A"]) == [5.0, 3.0]
        assert md.predict_scores(model, emb, ["A", "B"]) == [3.0, 5.0]


class TestModelPersistence:
    def test_round_trip(self, tmp_path):
        items = make_items([1, 2, 3, 5, 8])
        emb = embeddings_for(items)
        pairs = simulate_pairs(items, k=1, seed=0)
        trained = md.train_comparative(pairs, emb, None,
                                       md.default_config(md.LOSS_COMPARATIVE, max_epochs=8))
        path = tmp_path / "model.json"
        md.save_model(trained, path)
        loaded = md.load_model(path)
        assert np.array_equal(loaded.head.w, trained.head.w)
        assert loaded.head.b == trained.head.b
        assert loaded.config == trained.config
        assert loaded.history == trained.history
        assert loaded.best_epoch == trained.best_epoch
