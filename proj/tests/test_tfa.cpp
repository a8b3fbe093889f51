#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "mdgait/errors.hpp"
#include "mdgait/rng.hpp"
#include "mdgait/signal.hpp"
#include "mdgait/tfa.hpp"

using namespace mdgait;
using testutil::fast_stft;
using testutil::tone;

namespace {

std::size_t argmax_col(const Matrix& m, std::size_t row) {
    std::size_t best = 0;
    for (std::size_t c = 1; c < m.cols(); ++c)
        if (m(row, c) > m(row, best)) best = c;
    return best;
}

Spectrogram noise_spectrogram(double seconds, std::uint64_t seed) {
    IqSignal sig;
    sig.sample_rate = 2560.0;
    const auto n = static_cast<std::size_t>(2560.0 * seconds);
    sig.samples.resize(n);
    Rng rng(seed);
    for (auto& s : sig.samples) s = cplx(rng.normal(), rng.normal());
    return stft_spectrogram(sig, fast_stft());
}

} // namespace

TEST_CASE("stft parameters are validated") {
    StftParams p;
    CHECK_NOTHROW(p.validate());
    p.window_length = 1;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = StftParams{};
    p.fft_size = 128; // below window_length
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = StftParams{};
    p.fft_size = 2049;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = StftParams{};
    p.hop = 0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = StftParams{};
    p.window.assign(10, 1.0); // wrong length
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.window.assign(255, 1.0);
    CHECK_NOTHROW(p.validate());
    p.window[3] = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p.window[3] = 2.0; // asymmetric
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("spectrogram geometry: frames, times, axis, bin lookup") {
    const auto spec = stft_spectrogram(tone(160.0), fast_stft());
    CHECK(spec.frames() == (15360 - 255) / 8 + 1);
    CHECK(spec.bins() == 2048);
    CHECK(spec.bin_width() == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(spec.frame_rate() == doctest::Approx(320.0).epsilon(1e-15));

    // Window centers: first frame covers samples [0, 255).
    CHECK(spec.frame_times[0] == doctest::Approx(127.0 / 2560.0).epsilon(1e-12));
    CHECK(spec.frame_times[1] - spec.frame_times[0] == doctest::Approx(8.0 / 2560.0).epsilon(1e-12));

    CHECK(spec.freq_axis.front() == doctest::Approx(-1280.0).epsilon(1e-12));
    CHECK(spec.freq_axis[1024] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(spec.freq_axis[1025] == doctest::Approx(1.25).epsilon(1e-12));

    CHECK(spec.bin_of(0.0) == 1024);
    CHECK(spec.bin_of(160.0) == 1152);
    CHECK(spec.bin_of(-160.0) == 896);
    CHECK(spec.bin_of(160.6) == 1152); // nearest bin
    CHECK(spec.bin_of(160.7) == 1153);
    CHECK(spec.bin_of(1e7) == 2047); // clamped
    CHECK(spec.bin_of(-1e7) == 0);
}

TEST_CASE("a pure tone concentrates power in its own bin, sign included") {
    const auto pos = stft_spectrogram(tone(160.0, 2560.0, 1.0), fast_stft());
    for (std::size_t f = 0; f < pos.frames(); f += 13) CHECK(argmax_col(pos.power, f) == 1152);

    const auto neg = stft_spectrogram(tone(-160.0, 2560.0, 1.0), fast_stft());
    for (std::size_t f = 0; f < neg.frames(); f += 13) CHECK(argmax_col(neg.power, f) == 896);

    const auto dc = stft_spectrogram(tone(0.0, 2560.0, 1.0), fast_stft());
    for (std::size_t f = 0; f < dc.frames(); f += 13) CHECK(argmax_col(dc.power, f) == 1024);
}

TEST_CASE("zero signal gives zero power") {
    IqSignal sig;
    sig.sample_rate = 2560.0;
    sig.samples.assign(600, cplx(0.0, 0.0));
    const auto spec = stft_spectrogram(sig, fast_stft());
    CHECK(spec.power.max_value() == 0.0);
}

TEST_CASE("stft rejects unusable input") {
    IqSignal sig;
    sig.sample_rate = 2560.0;
    sig.samples.assign(254, cplx(1.0, 0.0)); // shorter than the window
    CHECK_THROWS_AS(stft_spectrogram(sig, fast_stft()), DataError);
    sig.samples.assign(600, cplx(1.0, 0.0));
    sig.sample_rate = 0.0;
    CHECK_THROWS_AS(stft_spectrogram(sig, fast_stft()), ValidationError);
}

TEST_CASE("hop subsamples the hop-1 frame sequence exactly") {
    const auto sig = tone(137.0, 2560.0, 0.5);
    StftParams p1 = fast_stft();
    p1.hop = 1;
    StftParams p8 = fast_stft(); // hop 8
    const auto s1 = stft_spectrogram(sig, p1);
    const auto s8 = stft_spectrogram(sig, p8);
    REQUIRE(s8.frames() <= (s1.frames() + 7) / 8);
    for (std::size_t f = 0; f < s8.frames(); f += 17) {
        CHECK(s8.frame_times[f] == s1.frame_times[8 * f]);
        bool equal = true;
        for (std::size_t c = 0; c < s8.bins(); ++c)
            equal = equal && s8.power(f, c) == s1.power(8 * f, c);
        CHECK(equal);
    }
}

TEST_CASE("a custom window equal to the default changes nothing") {
    const auto sig = tone(200.0, 2560.0, 0.3);
    StftParams def = fast_stft();
    StftParams custom = fast_stft();
    custom.window = hamming_window(custom.window_length);
    const auto a = stft_spectrogram(sig, def);
    const auto b = stft_spectrogram(sig, custom);
    CHECK(a.power == b.power);
}

TEST_CASE("denoise suppresses most pure-noise cells at a 6 dB margin") {
    const auto spec = noise_spectrogram(1.0, 3);
    const auto den = denoise(spec, 6.0);
    CHECK(den.denoised);
    CHECK(den.denoise_margin_db == 6.0);
    REQUIRE(den.noise_floor.size() == spec.bins());

    std::size_t clamped = 0, total = 0;
    for (std::size_t f = 0; f < spec.frames(); ++f)
        for (std::size_t c = 0; c < spec.bins(); ++c) {
            ++total;
            if (den.power(f, c) == den.noise_floor[c] && spec.power(f, c) != den.noise_floor[c])
                ++clamped;
        }
    const double fraction = static_cast<double>(clamped) / static_cast<double>(total);
    CHECK(fraction >= 0.95);
    CHECK(fraction <= 0.999); // outliers above the margin must survive
}

TEST_CASE("denoise keeps a strong ridge in place") {
    const auto spec = stft_spectrogram(tone(160.0, 2560.0, 1.0, 0.0, 7), fast_stft());
    const auto den = denoise(spec, 8.0);
    for (std::size_t f = 0; f < den.frames(); f += 7) CHECK(argmax_col(den.power, f) == 1152);
    // The ridge's level is preserved to within its own 20th percentile.
    double before = 0.0, after = 0.0;
    for (std::size_t f = 0; f < den.frames(); ++f) {
        before += spec.power(f, 1152);
        after += den.power(f, 1152);
    }
    CHECK(after / before > 0.5);
    CHECK(after / before <= 1.0 + 1e-12);
}

TEST_CASE("denoise is idempotent") {
    const auto spec = noise_spectrogram(0.5, 11);
    const auto once = denoise(spec, 8.0);
    const auto twice = denoise(once, 8.0);
    CHECK(once.power == twice.power);
    CHECK(once.noise_floor == twice.noise_floor);
}

TEST_CASE("an all-equal spectrogram passes through denoise unchanged") {
    Spectrogram spec;
    spec.power = Matrix(5, 4, 3.7);
    spec.sample_rate = 2560.0;
    for (double margin : {0.0, 6.0, 20.0}) {
        const auto den = denoise(spec, margin);
        CHECK(den.power == spec.power);
        for (double fl : den.noise_floor) CHECK(fl == 3.7);
    }
}

TEST_CASE("denoise validates its inputs") {
    Spectrogram spec;
    CHECK_THROWS_AS(denoise(spec, 6.0), ValidationError);
    spec.power = Matrix(2, 2, 1.0);
    CHECK_THROWS_AS(denoise(spec, -1.0), ValidationError);
}

TEST_CASE("to_db references the matrix peak and maps zeros to -inf") {
    Spectrogram spec;
    spec.power = Matrix(1, 3);
    spec.power(0, 0) = 1.0;
    spec.power(0, 1) = 0.1;
    spec.power(0, 2) = 0.0;
    const Matrix db = to_db(spec);
    CHECK(db(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(db(0, 1) == doctest::Approx(-10.0).epsilon(1e-12));
    CHECK(std::isinf(db(0, 2)));
    CHECK(db(0, 2) < 0.0);
}

TEST_CASE("to_gray maps the dB range onto [0, 1]") {
    Matrix region(1, 4);
    region(0, 0) = 1.0;
    region(0, 1) = std::pow(10.0, -2.5); // -25 dB
    region(0, 2) = 1e-5; // -50 dB
    region(0, 3) = 0.0;
    const Matrix gray = to_gray(region, -50.0, 0.0);
    CHECK(gray(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gray(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(gray(0, 2) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(gray(0, 3) == 0.0);

    const Matrix zeros = to_gray(Matrix(3, 3, 0.0), -50.0, 0.0);
    CHECK(zeros.max_value() == 0.0);

    CHECK_THROWS_AS(to_gray(Matrix(), -50.0, 0.0), ValidationError);
    CHECK_THROWS_AS(to_gray(region, 0.0, 0.0), ValidationError);
}
