import io

import pytest
from PIL import Image

from rewardserver import ConstantModel, MeanGrayModel, ModelError, load_model


def png_bytes(value, size=(4, 4)):
    img = Image.new("L", size, color=value)
    buf = io.BytesIO()
    img.save(buf, format="PNG")
    return buf.getvalue()


class TestConstantModel:
    def test_score_returns_value(self):
        model = ConstantModel(0.25)
        assert model.score("anything", b"not even an image") == 0.25

    def test_half_is_bit_exact(self):
        model = load_model("constant:0.5")
        assert model.score("p", png_bytes(0)) == 0.5

    def test_spec_string(self):
        assert ConstantModel(0.75).spec == "constant:0.75"

    def test_rejects_nan(self):
        with pytest.raises(ModelError):
            ConstantModel(float("nan"))

    def test_rejects_inf(self):
        with pytest.raises(ModelError):
            ConstantModel(float("inf"))

    def test_negative_value_allowed(self):
        assert ConstantModel(-1.0).score("p", b"") == -1.0


class TestMeanGrayModel:
    def test_black_image_scores_zero(self):
        model = MeanGrayModel()
        assert model.score("p", png_bytes(0)) == 0.0

    def test_white_image_scores_one(self):
        model = MeanGrayModel()
        assert model.score("p", png_bytes(255)) == 1.0

    def test_mid_gray(self):
        model = MeanGrayModel()
        assert model.score("p", png_bytes(128)) == pytest.approx(128 / 255)

    def test_spec_string(self):
        assert MeanGrayModel().spec == "meangray"

    def test_garbage_bytes_raise(self):
        model = MeanGrayModel()
        with pytest.raises(Exception):
            model.score("p", b"definitely not a png")

    def test_rgb_input_converted(self):
        img = Image.new("RGB", (4, 4), color=(255, 0, 0))
        buf = io.BytesIO()
        img.save(buf, format="PNG")
        score = MeanGrayModel().score("p", buf.getvalue())
        # luma of pure red sits well inside (0, 1)
        assert 0.0 < score < 0.5


class TestLoadModel:
    def test_constant_parses_float(self):
        model = load_model("constant:0.125")
        assert isinstance(model, ConstantModel)
        assert model.value == 0.125

    def test_meangray(self):
        assert isinstance(load_model("meangray"), MeanGrayModel)

    def test_unknown_spec(self):
        with pytest.raises(ModelError):
            load_model("telepathy")

    def test_constant_bad_float(self):
        with pytest.raises(ModelError):
            load_model("constant:abc")

    def test_constant_nan_rejected(self):
        with pytest.raises(ModelError):
            load_model("constant:nan")

    def test_spec_round_trip(self):
        for spec in ("constant:0.5", "constant:-2.0", "meangray"):
            assert load_model(spec).spec == spec
