import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from mclt_codec import MCLTCodec, MultiStageVQ, corpus
from mclt_codec.codec import decode_stream, encode_stream
from mclt_codec.config import CodecConfig
from mclt_codec.vq import default_codebooks


def test_params_and_clone():
    est = MCLTCodec(bit_budget_scale=0.5, force_ctns="off")
    assert est.get_params()["bit_budget_scale"] == 0.5
    twin = clone(est)
    assert twin.get_params() == est.get_params()
    assert not hasattr(twin, "config_")


def test_codec_transform_matches_functional_api():
    x = corpus.generate("tone", 3, 0.5).signal
    est = MCLTCodec().fit()
    ref = decode_stream(encode_stream(x, CodecConfig()).data, CodecConfig())
    assert np.array_equal(est.transform(x), ref)
    batch = est.transform(np.stack([x, 0.5 * x]))
    assert batch.shape == (2, len(x))
    assert est.score(x) > 10


def test_codec_bypass_is_lossless():
    x = corpus.generate("switching", 1, 0.5).signal
    est = MCLTCodec(bypass_quant=True).fit(x)
    assert np.max(np.abs(est.transform(x) - x)) < 1e-9


def test_codec_errors():
    with pytest.raises(NotFittedError):
        MCLTCodec().encode(np.zeros(10))
    with pytest.raises(ValueError):
        MCLTCodec(force_ctns="sometimes").fit()
    with pytest.raises(ValueError):
        MCLTCodec().fit().encode(np.zeros((2, 10)))
    with pytest.raises(ValueError):
        MCLTCodec().fit().transform(np.array([0.0, np.nan]))


def test_vq_fit_transform_inverse(rng):
    centres = rng.uniform(-5, 5, (4, 3))
    X = np.concatenate([c + 0.01 * rng.standard_normal((100, 3)) for c in centres])
    vq = MultiStageVQ(n_bits=2, n_stages=2).fit(X)
    codes = vq.transform(X)
    assert codes.shape == (400, 2)
    rec = vq.inverse_transform(codes)
    assert np.max(np.abs(rec - X)) < 0.1
    assert -0.01 < vq.score(X) <= 0
    with pytest.raises(ValueError):
        vq.transform(X[:, :2])


def test_vq_from_codebook_matches_lsf_search(rng):
    lsf_book, _ = default_codebooks()
    vq = MultiStageVQ.from_codebook(lsf_book)
    assert vq.n_bits == 10 and vq.n_stages == 2
    X = np.sort(rng.uniform(0.1, 3.0, (20, 16)), axis=1)
    rec = vq.inverse_transform(vq.transform(X))
    assert rec.shape == X.shape
    assert vq.score(X) > -np.mean(np.sum((X - X.mean(axis=0)) ** 2, axis=1))
