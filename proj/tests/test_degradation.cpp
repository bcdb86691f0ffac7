#include <doctest.h>

#include <cmath>

#include "echosr/dataset.hpp"
#include "echosr/degradation.hpp"
#include "echosr/metrics.hpp"
#include "echosr/rng.hpp"
#include "test_util.hpp"

using namespace echosr;
using namespace echosr::testutil;

TEST_CASE("downsample shape contract across random sizes and factors") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int r = trial % 2 == 0 ? 2 : 4;
    const int h = rng.uniform_int(r, 120);
    const int w = rng.uniform_int(r, 120);
    const Image img = random_image(rng, h, w);
    const Image lr = bicubic_downsample(img, r);
    CHECK(lr.height == h / r);
    CHECK(lr.width == w / r);
    const Image up = bicubic_upsample(lr, r);
    CHECK(up.height == lr.height * r);
    CHECK(up.width == lr.width * r);
  }
}

TEST_CASE("specific shapes: 256 and 259 both land at 64 under r=4") {
  const Image a(256, 256, 0.4);
  CHECK(bicubic_downsample(a, 4).height == 64);
  const Image b(259, 259, 0.4);  // floor(259/4)*4 = 256 after the crop
  const Image lr = bicubic_downsample(b, 4);
  CHECK(lr.height == 64);
  CHECK(lr.width == 64);
}

TEST_CASE("constant images are fixed points of both resamplers") {
  const Image c(64, 64, 0.5);
  const Image down = bicubic_downsample(c, 4);
  for (double v : down.px) CHECK(v == doctest::Approx(0.5).epsilon(1e-6));
  const Image c2(16, 16, 0.3);
  const Image up = bicubic_upsample(c2, 4);
  CHECK(up.height == 64);
  for (double v : up.px) CHECK(v == doctest::Approx(0.3).epsilon(1e-6));
  // Down-then-up on a constant image is the identity.
  const Image round = bicubic_upsample(bicubic_downsample(c, 4), 4);
  for (std::size_t i = 0; i < c.size(); ++i)
    CHECK(round.px[i] == doctest::Approx(c.px[i]).epsilon(1e-6));
}

TEST_CASE("outputs stay in [0, 1] after clamping") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Image img = random_image(rng, 40, 40);
    CHECK(image_in_unit_range(bicubic_downsample(img, 4)));
    CHECK(image_in_unit_range(bicubic_upsample(img, 2)));
  }
}

TEST_CASE("down-then-up on a speckled frame loses information but stays finite") {
  const EchoDataset ds = synthesize_dataset(1, 64, 5);
  const Image& frame = ds.frames[0].img();
  const Image round = bicubic_upsample(bicubic_downsample(frame, 4), 4);
  const double p = psnr(frame, round);
  CHECK(std::isfinite(p));
  CHECK(p > 5.0);
  CHECK(p < 60.0);  // strictly worse than the identity's +inf
}

TEST_CASE("downsampling approximately preserves mean intensity on phantoms") {
  const EchoDataset ds = synthesize_dataset(3, 64, 9);
  for (const auto& f : ds.frames) {
    const Image lr = bicubic_downsample(f.img(), 4);
    const double m_src = image_mean(f.img());
    const double m_lr = image_mean(lr);
    CHECK(std::fabs(m_lr - m_src) / m_src < 0.05);
  }
}

TEST_CASE("precondition violations are hard errors") {
  const Image small(3, 3, 0.5);
  CHECK_THROWS_AS(bicubic_downsample(small, 4), std::invalid_argument);
  CHECK_THROWS_AS(bicubic_downsample(small, 1), std::invalid_argument);
  CHECK_THROWS_AS(bicubic_upsample(small, 1), std::invalid_argument);
}

TEST_CASE("make_sr_pairs yields one aligned pair per frame") {
  const EchoDataset ds = synthesize_dataset(2, 64, 11);
  const auto pairs = make_sr_pairs(ds, 4);
  CHECK(pairs.size() == ds.size());
  for (const auto& p : pairs) {
    CHECK(p.hr->height == 4 * p.lr->height);
    CHECK(p.hr->width == 4 * p.lr->width);
    CHECK(image_in_unit_range(*p.lr));
    CHECK(image_in_unit_range(*p.hr));
  }
  EchoDataset empty;
  CHECK_THROWS_AS(make_sr_pairs(empty, 4), std::invalid_argument);
}

TEST_CASE("single 128x128 frame produces a 32x32 LR pair") {
  Rng rng(3);
  Image img = random_image(rng, 128, 128);
  std::vector<EchoFrame> frames(1);
  frames[0].patient_id = "p1";
  frames[0].image = share(std::move(img));
  const EchoDataset ds = make_dataset(std::move(frames), Provenance::synthetic);
  const auto pairs = make_sr_pairs(ds, 4);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0].lr->height == 32);
  CHECK(pairs[0].lr->width == 32);
}

TEST_CASE("pair dump and reload round-trips through 16-bit golden files") {
  const EchoDataset ds = synthesize_dataset(1, 64, 13);
  const auto pairs = make_sr_pairs(ds, 4);
  const auto dir = std::filesystem::temp_directory_path() / "echosr_test_pairs";
  std::filesystem::remove_all(dir);
  dump_pairs(pairs, dir);
  const auto loaded = load_pairs(dir);
  REQUIRE(loaded.size() == pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    CHECK(loaded[i].scale == pairs[i].scale);
    REQUIRE(loaded[i].hr->size() == pairs[i].hr->size());
    for (std::size_t j = 0; j < pairs[i].hr->size(); ++j)
      CHECK(std::fabs(loaded[i].hr->px[j] - pairs[i].hr->px[j]) <= 0.5 / 65535.0);
  }
  std::filesystem::remove_all(dir);
}
