import base64
import io

import pytest
from PIL import Image

from rewardserver import (ConstantModel, MeanGrayModel, RequestError,
                          score_request)


def b64_png(value, size=(4, 4)):
    img = Image.new("L", size, color=value)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


CONST = ConstantModel(0.5)


class TestHappyPath:
    def test_three_images(self):
        body = {"prompt": "p", "images": [b64_png(0), b64_png(128), b64_png(255)]}
        assert score_request(CONST, body) == [0.5, 0.5, 0.5]

    def test_empty_list_gives_empty_scores(self):
        assert score_request(CONST, {"prompt": "p", "images": []}) == []

    def test_meangray_preserves_order(self):
        body = {"prompt": "p", "images": [b64_png(v) for v in (0, 64, 128, 255)]}
        scores = score_request(MeanGrayModel(), body)
        assert scores == sorted(scores)
        assert scores[0] == 0.0 and scores[-1] == 1.0

    def test_scores_are_floats(self):
        scores = score_request(CONST, {"prompt": "p", "images": [b64_png(0)]})
        assert all(type(s) is float for s in scores)


class TestValidation:
    def test_missing_prompt(self):
        with pytest.raises(RequestError) as err:
            score_request(CONST, {"images": []})
        assert err.value.status == 400
        assert str(err.value) == "missing key: prompt"

    def test_missing_images(self):
        with pytest.raises(RequestError) as err:
            score_request(CONST, {"prompt": "p"})
        assert err.value.status == 400
        assert str(err.value) == "missing key: images"

    def test_body_not_a_dict(self):
        with pytest.raises(RequestError) as err:
            score_request(CONST, [1, 2, 3])
        assert err.value.status == 400

    def test_prompt_not_a_string(self):
        with pytest.raises(RequestError) as err:
            score_request(CONST, {"prompt": 7, "images": []})
        assert err.value.status == 400
        assert "prompt" in str(err.value)

    def test_images_not_a_list(self):
        with pytest.raises(RequestError) as err:
            score_request(CONST, {"prompt": "p", "images": "nope"})
        assert err.value.status == 400
        assert "images" in str(err.value)

    def test_non_string_entry_names_index(self):
        body = {"prompt": "p", "images": [b64_png(0), 42]}
        with pytest.raises(RequestError) as err:
            score_request(CONST, body)
        assert err.value.status == 400
        assert "images[1]" in str(err.value)

    def test_invalid_base64_names_index(self):
        body = {"prompt": "p", "images": ["!!! not base64 !!!"]}
        with pytest.raises(RequestError) as err:
            score_request(CONST, body)
        assert err.value.status == 400
        assert "images[0]" in str(err.value)

    def test_oversize_batch_is_413(self):
        body = {"prompt": "p", "images": [b64_png(0)] * 5}
        with pytest.raises(RequestError) as err:
            score_request(CONST, body, max_batch=4)
        assert err.value.status == 413

    def test_batch_at_limit_accepted(self):
        body = {"prompt": "p", "images": [b64_png(0)] * 4}
        assert len(score_request(CONST, body, max_batch=4)) == 4


class TestScorerFailures:
    def test_model_exception_propagates(self):
        class Broken:
            spec = "broken"

            def score(self, prompt, blob):
                raise ValueError("boom")

        body = {"prompt": "p", "images": [b64_png(0)]}
        # not a RequestError: the handler maps this to a 500
        with pytest.raises(ValueError):
            score_request(Broken(), body)

    def test_nonfinite_score_raises(self):
        class NaNModel:
            spec = "nan"

            def score(self, prompt, blob):
                return float("nan")

        body = {"prompt": "p", "images": [b64_png(0)]}
        with pytest.raises(RuntimeError):
            score_request(NaNModel(), body)

    def test_undecodable_png_under_meangray_is_not_a_request_error(self):
        # valid base64, invalid PNG: decoding happens inside the scorer,
        # so this surfaces as a server-side failure rather than a 4xx
        blob = base64.b64encode(b"valid base64, bad image").decode("ascii")
        body = {"prompt": "p", "images": [blob]}
        try:
            score_request(MeanGrayModel(), body)
        except RequestError:
            pytest.fail("scorer failure must not map to a client error")
        except Exception:
            pass
        else:
            pytest.fail("expected the scorer to reject garbage bytes")
