from datetime import datetime

import numpy as np
import pytest
from fastapi.testclient import TestClient

from conftest import make_post
from postimpact.bundle import (DraftPost, ImpactForecast, ModelBundle,
                               forecast, load_bundle, save_bundle)
from postimpact.corpus import Impact, LinkKind, ProblemKind, label_posts
from postimpact.errors import EmptyDraft, ModelMissing
from postimpact.features import FeatureConfig, fit_pipeline, prepare_post
from postimpact.learners import LearnerKind, train
from postimpact.service import create_app


def small_corpus(n=24):
    rng = np.random.default_rng(3)
    posts = []
    for i in range(n):
        hot = i % 3 == 0
        r = 40 if hot else 3
        posts.append(make_post(
            id=str(i),
            text="gran sorteo hoy" if hot else f"foto del dia {i}",
            like=r, love=max(1, r // 4), haha=i % 2, sad=(i + 1) % 2,
            comments=r // 2, shares=r // 3,
            link_kind=LinkKind.IMAGE if hot else LinkKind.NONE,
        ))
    return label_posts(posts)


def make_bundle(labeled, kind=LearnerKind.NAIVE_BAYES, config="c+b+s", **kw):
    prepared = [prepare_post(lp.post) for lp in labeled]
    cfg = FeatureConfig.parse(config)
    state, vectors = fit_pipeline(prepared, cfg)
    models = {}
    for problem in ProblemKind:
        labels = [lp.labels[problem] for lp in labeled]
        models[problem] = train(kind, problem, vectors, labels, config=cfg,
                                normalizer=state.normalizer,
                                vocabulary=state.vocabulary,
                                time_profile=state.time_profile, **kw)
    return ModelBundle(models=models)


@pytest.fixture(scope="module")
def labeled():
    return small_corpus()


@pytest.fixture(scope="module")
def bundle(labeled):
    return make_bundle(labeled)


@pytest.fixture(scope="module")
def client(bundle):
    return TestClient(create_app(bundle))


class TestBundle:
    def test_incomplete_bundle_rejected(self, bundle):
        partial = dict(bundle.models)
        partial.pop(ProblemKind.SHARES)
        with pytest.raises(ModelMissing):
            ModelBundle(models=partial)

    def test_save_load_round_trip(self, bundle, labeled, tmp_path):
        save_bundle(bundle.models, tmp_path)
        loaded = load_bundle(tmp_path)
        draft = DraftPost(text="gran sorteo", published_at=datetime(2019, 1, 7, 18))
        assert forecast(draft, loaded).predictions == forecast(draft, bundle).predictions

    def test_load_missing_model_file(self, bundle, tmp_path):
        save_bundle(bundle.models, tmp_path)
        (tmp_path / "model_S.zip").unlink()
        with pytest.raises(ModelMissing):
            load_bundle(tmp_path)

    def test_empty_draft_rejected(self):
        with pytest.raises(EmptyDraft):
            DraftPost(text="   ")


class TestForecast:
    def test_exactly_six_predictions(self, bundle):
        result = forecast(DraftPost(text="hola"), bundle)
        assert set(result.predictions) == set(ProblemKind)
        assert set(result.model_versions) == set(ProblemKind)
        for pred in result.predictions.values():
            assert pred.label in (Impact.HIGH, Impact.LOW)
            assert 0.0 <= pred.score <= 1.0

    def test_pure_function_of_draft_and_bundle(self, bundle):
        draft = DraftPost(text="gran sorteo \U0001F600",
                          published_at=datetime(2019, 1, 7, 18))
        assert forecast(draft, bundle) == forecast(draft, bundle)

    def test_feature_echo(self, bundle):
        result = forecast(DraftPost(text="Hola MUNDO 123! \U0001F600 #a @b"), bundle)
        assert result.behavioral_echo == {"emojis": 1, "hashtags": 1,
                                          "mentions": 1, "links": 0}
        assert result.style_echo["words"] == 6
        assert result.style_echo["numerals"] == 3

    def test_knn_zero_distance_recovers_training_labels(self, labeled):
        knn_bundle = make_bundle(labeled, kind=LearnerKind.KNN,
                                 hyperparams={"k": 1})
        target = labeled[0]
        draft = DraftPost(text=target.post.text,
                          link_kind=target.post.link_kind,
                          published_at=target.post.published_at)
        result = forecast(draft, knn_bundle)
        for problem in ProblemKind:
            assert result.predictions[problem].label is target.labels[problem]


class TestHTTP:
    def test_health_lists_six_model_versions(self, client):
        body = client.get("/health").json()
        assert body["status"] == "ok"
        assert set(body["models"]) == {k.value for k in ProblemKind}

    def test_predict_shape(self, client):
        r = client.post("/predict", json={"text": "gran sorteo",
                                          "published_at": "2019-01-07T18:30:00"})
        assert r.status_code == 200
        body = r.json()
        assert set(body["predictions"]) == {k.value for k in ProblemKind}
        assert set(body["features"]) == {"style", "behavioral"}

    def test_repeated_requests_byte_identical(self, client):
        payload = {"text": "gran sorteo \U0001F600", "link_kind": "image",
                   "published_at": "2019-01-07T18:30:00"}
        first = client.post("/predict", json=payload)
        for _ in range(5):
            assert client.post("/predict", json=payload).content == first.content

    def test_empty_draft_422(self, client):
        assert client.post("/predict", json={"text": "   "}).status_code == 422

    def test_missing_text_422(self, client):
        assert client.post("/predict", json={}).status_code == 422

    def test_bad_link_kind_422(self, client):
        r = client.post("/predict", json={"text": "hola", "link_kind": "gif"})
        assert r.status_code == 422

    def test_request_storm_leaves_models_unchanged(self, client, bundle):
        before = bundle.checksums()
        payload = {"text": "hola mundo \U0001F680",
                   "published_at": "2019-01-07T18:30:00"}
        for _ in range(100):
            assert client.post("/predict", json=payload).status_code == 200
        assert bundle.checksums() == before

    def test_overflow_rejected_with_503(self, bundle):
        throttled = TestClient(create_app(bundle, max_in_flight=0))
        r = throttled.post("/predict", json={"text": "hola"})
        assert r.status_code == 503
        assert "Retry-After" in r.headers
