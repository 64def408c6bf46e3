#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "oracles.h"
#include "sonoscope/errors.h"
#include "sonoscope/signal_io.h"
#include "test_util.h"

namespace sonoscope {
namespace {

std::vector<unsigned char> pcm16(const std::vector<std::int16_t>& v) {
  std::vector<unsigned char> out;
  for (auto s : v) testutil::put_u16(out, static_cast<std::uint16_t>(s));
  return out;
}

TEST(ReadWav, Pcm16ScalesByPowerOfTwo) {
  testutil::TempDir dir;
  testutil::write_bytes(dir / "a.wav", testutil::wav_bytes(1, 1, 16000, 16, pcm16({0, 16384, -16384})));
  const AudioBuffer buf = read_wav(dir / "a.wav");
  EXPECT_EQ(buf.sample_rate_hz, 16000);
  ASSERT_EQ(buf.samples.size(), 3u);
  EXPECT_EQ(buf.samples[0], 0.0f);
  EXPECT_EQ(buf.samples[1], 0.5f);
  EXPECT_EQ(buf.samples[2], -0.5f);
}

TEST(ReadWav, StereoIsAveraged) {
  testutil::TempDir dir;
  std::vector<unsigned char> data;
  const float l = 1.0f, r = 0.0f;
  std::uint32_t bits;
  std::memcpy(&bits, &l, 4);
  testutil::put_u32(data, bits);
  std::memcpy(&bits, &r, 4);
  testutil::put_u32(data, bits);
  testutil::write_bytes(dir / "s.wav", testutil::wav_bytes(3, 2, 8000, 32, data));
  const AudioBuffer buf = read_wav(dir / "s.wav");
  ASSERT_EQ(buf.samples.size(), 1u);
  EXPECT_FLOAT_EQ(buf.samples[0], 0.5f);
}

TEST(ReadWav, Pcm24IsUnsupported) {
  testutil::TempDir dir;
  testutil::write_bytes(dir / "x.wav", testutil::wav_bytes(1, 1, 16000, 24, {0, 0, 0, 1, 2, 3}));
  EXPECT_THROW(read_wav(dir / "x.wav"), UnsupportedError);
}

TEST(ReadWav, MalformedHeaderIsFormatError) {
  testutil::TempDir dir;
  testutil::write_bytes(dir / "bad.wav", {'R', 'I', 'F', 'X', 0, 0, 0, 0, 'W', 'A', 'V', 'E'});
  EXPECT_THROW(read_wav(dir / "bad.wav"), FormatError);
  testutil::write_bytes(dir / "short.wav", {'R', 'I'});
  EXPECT_THROW(read_wav(dir / "short.wav"), FormatError);
}

TEST(ReadWav, FourChannelsUnsupported) {
  testutil::TempDir dir;
  testutil::write_bytes(dir / "q.wav", testutil::wav_bytes(1, 4, 16000, 16, pcm16({1, 2, 3, 4})));
  EXPECT_THROW(read_wav(dir / "q.wav"), UnsupportedError);
}

TEST(WriteWav, RoundTripsBothEncodings) {
  testutil::TempDir dir;
  const std::vector<float> samples = {0.0f, 0.25f, -0.75f, 0.5f};
  write_wav(dir / "p.wav", samples, 22050, WavEncoding::kPcm16);
  write_wav(dir / "f.wav", samples, 22050, WavEncoding::kFloat32);
  const auto p = read_wav(dir / "p.wav");
  const auto f = read_wav(dir / "f.wav");
  EXPECT_EQ(p.sample_rate_hz, 22050);
  EXPECT_EQ(f.samples, samples);
  ASSERT_EQ(p.samples.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) EXPECT_NEAR(p.samples[i], samples[i], 1.0 / 32768);
}

TEST(Resample, EqualRateIsBitExactCopy) {
  AudioBuffer buf;
  buf.sample_rate_hz = 16000;
  buf.samples = oracle::sine(440.0, 16000, 1000);
  buf.recording_id = "r";
  buf.class_label = 2;
  const AudioBuffer out = resample(buf, 16000);
  EXPECT_EQ(out.samples, buf.samples);
  EXPECT_EQ(out.recording_id, "r");
  EXPECT_EQ(out.class_label, 2);
}

TEST(Resample, EmptyBufferThrows) {
  AudioBuffer buf;
  buf.sample_rate_hz = 16000;
  EXPECT_THROW(resample(buf, 16000), EmptyInputError);
}

// Power spectrum of the Hann-windowed middle of `x`.
std::vector<double> power_spectrum(const std::vector<float>& x, std::size_t len) {
  const std::size_t start = (x.size() - len) / 2;
  const auto w = oracle::hann(static_cast<int>(len));
  std::vector<double> seg(len);
  for (std::size_t i = 0; i < len; ++i) seg[i] = w[i] * x[start + i];
  const auto spec = oracle::dft(seg);
  std::vector<double> p(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) p[k] = std::norm(spec[k]);
  return p;
}

TEST(Resample, DownsampledToneKeepsDominantBinAndLowSidelobes) {
  AudioBuffer buf;
  buf.sample_rate_hz = 32000;
  buf.samples = oracle::sine(1000.0, 32000, 32000, 0.8);
  const AudioBuffer out = resample(buf, 16000);
  EXPECT_EQ(out.sample_rate_hz, 16000);
  const std::size_t len = 4000;
  const auto p = power_spectrum(out.samples, len);
  const std::size_t peak = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  EXPECT_EQ(peak, 1000u * len / 16000u);
  double main = 0.0, side = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    (k + 3 >= peak && k <= peak + 3 ? main : side) += p[k];
  }
  EXPECT_LT(side, 1e-3 * main);
}

TEST(Resample, UpsampledLengthFollowsRateRatio) {
  AudioBuffer buf;
  buf.sample_rate_hz = 8000;
  buf.samples = oracle::sine(300.0, 8000, 8000, 0.5);
  const AudioBuffer out = resample(buf, 16000);
  EXPECT_NEAR(static_cast<double>(out.samples.size()), 16000.0, 1.0);
  for (float v : out.samples) EXPECT_LE(std::abs(v), 1.0f);
}

TEST(Resample, RoundTripPreservesToneBin) {
  for (double f : {250.0, 1000.0, 3000.0, 6000.0}) {
    AudioBuffer buf;
    buf.sample_rate_hz = 16000;
    buf.samples = oracle::sine(f, 16000, 16000, 0.7);
    const AudioBuffer back = resample(resample(buf, 32000), 16000);
    const auto p = power_spectrum(back.samples, 4000);
    const std::size_t peak = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
    EXPECT_EQ(peak, static_cast<std::size_t>(f * 4000 / 16000)) << f;
  }
}

TEST(Segment, CountsAndDiscardsRemainder) {
  AudioBuffer buf;
  buf.sample_rate_hz = 16000;
  buf.recording_id = "rec";
  buf.class_label = 1;
  buf.samples.resize(160000);
  std::iota(buf.samples.begin(), buf.samples.end(), 0.0f);
  const auto segs = segment(buf, 3.0);
  ASSERT_EQ(segs.size(), 3u);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(segs[i].segment_index, i);
    EXPECT_EQ(segs[i].recording_id, "rec");
    EXPECT_EQ(segs[i].class_label, 1);
    ASSERT_EQ(segs[i].samples.size(), 48000u);
    EXPECT_EQ(segs[i].samples.front(), static_cast<float>(i * 48000));
  }
}

TEST(Segment, ExactAndShortRecordings) {
  AudioBuffer buf;
  buf.sample_rate_hz = 16000;
  buf.samples = oracle::sine(100.0, 16000, 48000);
  const auto one = segment(buf, 3.0);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].samples, buf.samples);
  buf.samples.resize(46400);
  EXPECT_TRUE(segment(buf, 3.0).empty());
}

TEST(Segment, NonIntegralLengthThrows) {
  AudioBuffer buf;
  buf.sample_rate_hz = 16000;
  buf.samples.resize(100000);
  EXPECT_THROW(segment(buf, 3.00001), RangeError);
}

std::array<std::int64_t, 3> counts_by_partition(const std::vector<RecordingInfo>& recs, const SplitManifest& m) {
  std::array<std::int64_t, 3> c{};
  for (const auto& r : recs) c[static_cast<std::size_t>(m.partition_of(r.recording_id))] += r.segment_count;
  return c;
}

TEST(Split, TenEqualRecordingsGiveSeventyTwentyTen) {
  std::vector<RecordingInfo> recs;
  for (int i = 0; i < 10; ++i) recs.push_back({"r" + std::to_string(i), 0, 10});
  for (std::uint64_t seed : {0ULL, 1ULL, 7ULL, 12345ULL}) {
    const auto m = split_dataset(recs, {0.7, 0.15, 0.15}, seed);
    const auto c = counts_by_partition(recs, m);
    EXPECT_EQ(c[0], 70);
    EXPECT_TRUE((c[1] == 20 && c[2] == 10) || (c[1] == 10 && c[2] == 20));
    EXPECT_EQ(m.segment_counts, c);
  }
}

TEST(Split, ThreeRecordingsOnePerPartition) {
  std::vector<RecordingInfo> recs = {{"a", 0, 5}, {"b", 0, 5}, {"c", 0, 5}};
  const auto m = split_dataset(recs, {0.34, 0.33, 0.33}, 3);
  std::set<Partition> seen;
  for (const auto& r : recs) seen.insert(m.partition_of(r.recording_id));
  EXPECT_EQ(seen.size(), 3u);
}

TEST(Split, DeterministicForSeed) {
  std::vector<RecordingInfo> recs;
  for (int i = 0; i < 30; ++i) recs.push_back({"r" + std::to_string(i), i % 3, 5 + i % 7});
  const auto a = split_dataset(recs, {0.7, 0.15, 0.15}, 42);
  const auto b = split_dataset(recs, {0.7, 0.15, 0.15}, 42);
  EXPECT_EQ(a.assignments, b.assignments);
  EXPECT_EQ(a.achieved_ratios, b.achieved_ratios);
}

TEST(Split, TooFewRecordingsInAClass) {
  std::vector<RecordingInfo> recs = {{"a", 0, 5}, {"b", 0, 5}, {"c", 0, 5}, {"d", 1, 5}, {"e", 1, 5}};
  EXPECT_THROW(split_dataset(recs, {0.7, 0.15, 0.15}, 0), InsufficientDataError);
}

TEST(Split, RandomCorporaRespectInvariants) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<RecordingInfo> recs;
    const int classes = oracle::random_int(gen, 1, 5);
    int max_count = 0;
    std::int64_t total = 0;
    for (int c = 0; c < classes; ++c) {
      const int n = oracle::random_int(gen, 3, 12);
      for (int i = 0; i < n; ++i) {
        const int segs = oracle::random_int(gen, 1, 30);
        recs.push_back({"c" + std::to_string(c) + "_" + std::to_string(i), c, segs});
        max_count = std::max(max_count, segs);
        total += segs;
      }
    }
    const std::array<double, 3> ratios = {0.7, 0.15, 0.15};
    const auto m = split_dataset(recs, ratios, gen());
    EXPECT_EQ(m.assignments.size(), recs.size());
    const auto c = counts_by_partition(recs, m);
    EXPECT_EQ(c[0] + c[1] + c[2], total);
    double ratio_sum = 0.0;
    for (int p = 0; p < 3; ++p) {
      EXPECT_LE(std::abs(m.achieved_ratios[p] - ratios[p]), static_cast<double>(max_count) / total + 1e-12);
      ratio_sum += m.achieved_ratios[p];
    }
    EXPECT_NEAR(ratio_sum, 1.0, 1e-12);
  }
}

TEST(SplitCsv, RoundTrip) {
  testutil::TempDir dir;
  std::vector<RecordingInfo> recs;
  for (int i = 0; i < 9; ++i) recs.push_back({"r" + std::to_string(i), i % 3, 4});
  const auto m = split_dataset(recs, {0.7, 0.15, 0.15}, 5);
  write_split_csv(dir / "split.csv", m);
  EXPECT_EQ(testutil::read_file(dir / "split.csv").substr(0, 26), "recording_id,partition,see");
  const auto back = read_split_csv(dir / "split.csv");
  EXPECT_EQ(back.assignments, m.assignments);
  EXPECT_EQ(back.seed, 5u);
}

TEST(CorpusManifest, ResolvesRelativePaths) {
  testutil::TempDir dir;
  std::ofstream(dir / "manifest.csv") << "recording_id,path,class_label\nship_a,audio/a.wav,2\nship_b,/abs/b.wav,0\n";
  const auto entries = read_corpus_manifest(dir / "manifest.csv");
  ASSERT_EQ(entries.size(), 2u);
  EXPECT_EQ(entries[0].recording_id, "ship_a");
  EXPECT_EQ(entries[0].path, dir.path() / "audio/a.wav");
  EXPECT_EQ(entries[0].class_label, 2);
  EXPECT_EQ(entries[1].path, std::filesystem::path("/abs/b.wav"));
}

TEST(CorpusManifest, RejectsBadHeader) {
  testutil::TempDir dir;
  std::ofstream(dir / "m.csv") << "id,file,label\n";
  EXPECT_THROW(read_corpus_manifest(dir / "m.csv"), FormatError);
}

}  // namespace
}  // namespace sonoscope
