#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "evitrack/simulator.hpp"

using namespace evitrack;

namespace {

ScenarioSpec small_scenario(std::uint64_t seed) {
  ScenarioSpec spec;
  spec.frame_width = 640;
  spec.frame_height = 512;
  spec.num_frames = 12;
  spec.presence = {{0, 12}};
  spec.seed = seed;
  return spec;
}

}  // namespace

TEST_CASE("scenario generation is a pure function of its spec") {
  const ScenarioSpec spec = small_scenario(41);
  const Scenario a = generate_scenario(spec);
  const Scenario b = generate_scenario(spec);
  REQUIRE(a.frames.size() == b.frames.size());
  for (std::size_t k = 0; k < a.frames.size(); ++k) {
    CHECK(a.annotations[k].visible == b.annotations[k].visible);
    if (a.annotations[k].visible) {
      CHECK(*a.annotations[k].box == *b.annotations[k].box);  // bitwise
    }
  }

  ScenarioSpec other = spec;
  other.seed = 42;
  const Scenario c = generate_scenario(other);
  CHECK_FALSE(*a.annotations[0].box == *c.annotations[0].box);
}

TEST_CASE("visibility follows the presence intervals exactly") {
  ScenarioSpec spec = small_scenario(7);
  spec.presence = {{2, 5}, {8, 10}};
  const Scenario scenario = generate_scenario(spec);
  for (int k = 0; k < 12; ++k) {
    const bool want = (k >= 2 && k < 5) || (k >= 8 && k < 10);
    const auto& ann = scenario.annotations[static_cast<std::size_t>(k)];
    const auto& frame = scenario.frames[static_cast<std::size_t>(k)];
    CHECK(ann.visible == want);
    CHECK(ann.box.has_value() == want);
    CHECK(frame.target.has_value() == want);
    if (want) CHECK(*frame.target == *ann.box);
    CHECK(frame.index == k);
  }
}

TEST_CASE("bouncing trajectories stay inside the frame") {
  ScenarioSpec spec = small_scenario(13);
  spec.num_frames = 400;
  spec.presence = {{0, 400}};
  spec.trajectory.speed = 15.0;
  spec.trajectory.turn_rate = 0.4;
  spec.trajectory.size_wobble = 0.2;
  const Scenario scenario = generate_scenario(spec);
  for (const auto& ann : scenario.annotations) {
    REQUIRE(ann.visible);
    CHECK(ann.box->x >= -1e-9);
    CHECK(ann.box->y >= -1e-9);
    CHECK(ann.box->x + ann.box->w <= 640.0 + 1e-9);
    CHECK(ann.box->y + ann.box->h <= 512.0 + 1e-9);
  }
}

TEST_CASE("distractors are static, sized to spec, and inside the frame") {
  ScenarioSpec spec = small_scenario(99);
  spec.num_distractors = 4;
  spec.distractor_min_size = 12.0;
  spec.distractor_max_size = 28.0;
  const Scenario scenario = generate_scenario(spec);
  const auto& first = scenario.frames[0].distractors;
  REQUIRE(first.size() == 4);
  for (const auto& frame : scenario.frames) {
    CHECK(frame.distractors == first);
  }
  for (const auto& d : first) {
    CHECK(d.w >= 12.0);
    CHECK(d.w <= 28.0);
    CHECK(d.h >= 12.0);
    CHECK(d.h <= 28.0);
    CHECK(d.x >= 0.0);
    CHECK(d.y >= 0.0);
    CHECK(d.x + d.w <= 640.0);
    CHECK(d.y + d.h <= 512.0);
  }
}

TEST_CASE("a straight run advances exactly one speed step per frame") {
  ScenarioSpec spec = small_scenario(1);
  spec.num_frames = 20;
  spec.presence = {{0, 20}};
  spec.trajectory.start_x = 100.0;
  spec.trajectory.start_y = 100.0;
  spec.trajectory.heading = 0.0;
  spec.trajectory.turn_rate = 0.0;
  spec.trajectory.speed = 3.0;
  const Scenario scenario = generate_scenario(spec);
  CHECK(scenario.annotations[0].box->x == 88.0);  // 100 - 24/2
  CHECK(scenario.annotations[0].box->y == 90.0);  // 100 - 20/2
  for (int k = 1; k < 20; ++k) {
    const double dx = scenario.annotations[static_cast<std::size_t>(k)].box->x -
                      scenario.annotations[static_cast<std::size_t>(k - 1)].box->x;
    CHECK(dx == 3.0);
    CHECK(scenario.annotations[static_cast<std::size_t>(k)].box->y == 90.0);
  }
}

TEST_CASE("burst frames take the long jump, all others the normal step") {
  ScenarioSpec spec = small_scenario(5);
  spec.num_frames = 20;
  spec.presence = {{0, 20}};
  spec.trajectory.start_x = 100.0;
  spec.trajectory.start_y = 100.0;
  spec.trajectory.heading = 0.0;
  spec.trajectory.turn_rate = 0.0;
  spec.trajectory.speed = 3.0;
  spec.trajectory.fast_bursts = 2;
  spec.trajectory.burst_jump = 30.0;
  const Scenario scenario = generate_scenario(spec);
  int bursts = 0;
  for (int k = 1; k < 20; ++k) {
    const double dx = scenario.annotations[static_cast<std::size_t>(k)].box->x -
                      scenario.annotations[static_cast<std::size_t>(k - 1)].box->x;
    if (dx == 30.0) {
      ++bursts;
    } else {
      CHECK(dx == 3.0);
    }
  }
  CHECK(bursts == 2);
}

TEST_CASE("scenario specs are validated") {
  SUBCASE("overlapping presence intervals") {
    ScenarioSpec spec = small_scenario(1);
    spec.presence = {{0, 6}, {4, 10}};
    CHECK_THROWS_AS(generate_scenario(spec), std::invalid_argument);
  }
  SUBCASE("interval outside the sequence") {
    ScenarioSpec spec = small_scenario(1);
    spec.presence = {{0, 13}};
    CHECK_THROWS_AS(generate_scenario(spec), std::invalid_argument);
  }
  SUBCASE("empty interval") {
    ScenarioSpec spec = small_scenario(1);
    spec.presence = {{5, 5}};
    CHECK_THROWS_AS(generate_scenario(spec), std::invalid_argument);
  }
  SUBCASE("box larger than the frame") {
    ScenarioSpec spec = small_scenario(1);
    spec.trajectory.box_width = 700.0;
    CHECK_THROWS_AS(generate_scenario(spec), std::invalid_argument);
  }
  SUBCASE("too many burst frames") {
    ScenarioSpec spec = small_scenario(1);
    spec.trajectory.fast_bursts = 12;
    CHECK_THROWS_AS(generate_scenario(spec), std::invalid_argument);
  }
  SUBCASE("size wobble beyond the cap") {
    ScenarioSpec spec = small_scenario(1);
    spec.trajectory.size_wobble = 0.95;
    CHECK_THROWS_AS(generate_scenario(spec), std::invalid_argument);
  }
  SUBCASE("distractor sizes inverted") {
    ScenarioSpec spec = small_scenario(1);
    spec.num_distractors = 1;
    spec.distractor_min_size = 30.0;
    spec.distractor_max_size = 20.0;
    CHECK_THROWS_AS(generate_scenario(spec), std::invalid_argument);
  }
}

TEST_CASE("without bounce, leaving the frame is an error") {
  ScenarioSpec spec = small_scenario(1);
  spec.num_frames = 20;
  spec.presence = {{0, 20}};
  spec.trajectory.bounce = false;
  spec.trajectory.start_x = 600.0;
  spec.trajectory.start_y = 100.0;
  spec.trajectory.heading = 0.0;
  spec.trajectory.turn_rate = 0.0;
  spec.trajectory.speed = 5.0;
  CHECK_THROWS_AS(generate_scenario(spec), std::invalid_argument);
}

TEST_CASE("zero-sigma jitter is the identity and still consumes its draws") {
  const BoundingBox box{10.0, 20.0, 24.0, 20.0};
  Rng used(123);
  Rng shadow(123);
  const BoundingBox out = jitter_box(box, 0.0, 0.0, used);
  CHECK(out == box);  // bitwise
  // Four normals, two uniforms each, whatever the sigmas.
  for (int i = 0; i < 8; ++i) shadow.next_double();
  CHECK(used.next_u64() == shadow.next_u64());

  Rng noisy(123);
  Rng noisy_shadow(123);
  jitter_box(box, 2.0, 0.5, noisy);
  for (int i = 0; i < 8; ++i) noisy_shadow.next_double();
  CHECK(noisy.next_u64() == noisy_shadow.next_u64());
}

TEST_CASE("jittered sizes never collapse below one pixel") {
  Rng rng(17);
  const BoundingBox box{0.0, 0.0, 2.0, 2.0};
  for (int i = 0; i < 50; ++i) {
    const BoundingBox out = jitter_box(box, 0.0, 1000.0, rng);
    CHECK(out.w >= 1.0);
    CHECK(out.h >= 1.0);
  }
}

TEST_CASE("a perfect detector reports the exact truth with an in-range score") {
  const SimDetectorModel model;  // recall 1, no noise, no false positives
  FrameState frame;
  frame.index = 0;
  FrameAnnotation ann;
  ann.visible = true;
  ann.box = BoundingBox{50.0, 60.0, 24.0, 20.0};
  Rng rng(3);
  const auto detections = simulate_detector(model, frame, ann, rng);
  REQUIRE(detections.size() == 1);
  CHECK(detections[0].box == *ann.box);
  CHECK(detections[0].score >= 0.55);
  CHECK(detections[0].score <= 0.95);
}

TEST_CASE("an invisible target yields no true detection") {
  const SimDetectorModel model;
  FrameState frame;
  FrameAnnotation ann;  // invisible
  Rng rng(3);
  CHECK(simulate_detector(model, frame, ann, rng).empty());
}

TEST_CASE("false positives come from the distractors") {
  SimDetectorModel model;
  model.recall = 0.0;
  model.false_positive_rate = 1.0;
  FrameState frame;
  frame.distractors = {{100.0, 100.0, 16.0, 16.0}, {300.0, 200.0, 20.0, 20.0}};
  FrameAnnotation ann;
  ann.visible = true;
  ann.box = BoundingBox{50.0, 60.0, 24.0, 20.0};
  Rng rng(3);
  const auto detections = simulate_detector(model, frame, ann, rng);
  REQUIRE(detections.size() == 2);
  CHECK(detections[0].box == frame.distractors[0]);
  CHECK(detections[1].box == frame.distractors[1]);
  for (const auto& det : detections) {
    CHECK(det.score >= 0.40);
    CHECK(det.score <= 0.90);
  }
}

TEST_CASE("detector draws are per frame, independent of call history") {
  SimDetectorModel model;
  model.recall = 0.7;
  model.localization_noise = 2.0;
  model.false_positive_rate = 0.4;

  ScenarioSpec spec = small_scenario(55);
  spec.num_distractors = 2;
  const Scenario scenario = generate_scenario(spec);

  SimDetector warm(model, 55);
  (void)warm.detect(scenario.frames[3]);
  (void)warm.detect(scenario.frames[4]);
  const auto from_warm = warm.detect(scenario.frames[5]);

  SimDetector cold(model, 55);
  const auto from_cold = cold.detect(scenario.frames[5]);

  REQUIRE(from_warm.size() == from_cold.size());
  for (std::size_t i = 0; i < from_warm.size(); ++i) {
    CHECK(from_warm[i].box == from_cold[i].box);
    CHECK(from_warm[i].score == from_cold[i].score);
  }
}

TEST_CASE("lock acquisition needs enough template overlap") {
  const SimTrackerModel model;  // acquisition_iou = 0.3
  FrameAnnotation truth;
  truth.visible = true;
  truth.box = BoundingBox{0.0, 0.0, 10.0, 10.0};

  TrackerLockState lock;
  acquire_lock(model, TemplateInfo{{0.0, 0.0, 10.0, 10.0}, 4}, truth, lock);
  CHECK(lock.initialized);
  CHECK(lock.locked);
  CHECK(lock.template_frame == 4);
  CHECK(lock.stale_box == BoundingBox{0.0, 0.0, 10.0, 10.0});

  TrackerLockState miss;
  acquire_lock(model, TemplateInfo{{100.0, 100.0, 10.0, 10.0}, 4}, truth, miss);
  CHECK(miss.initialized);
  CHECK_FALSE(miss.locked);

  TrackerLockState blind;
  acquire_lock(model, TemplateInfo{{0.0, 0.0, 10.0, 10.0}, 4}, FrameAnnotation{},
               blind);
  CHECK_FALSE(blind.locked);
}

TEST_CASE("a locked drift-free tracker echoes the truth with strong evidence") {
  const SimTrackerModel model;  // drift 0, lock_loss 0, confusion 0
  FrameAnnotation truth;
  truth.visible = true;
  truth.box = BoundingBox{40.0, 40.0, 24.0, 20.0};
  const TemplateInfo tmpl{*truth.box, 0};
  TrackerLockState lock;
  acquire_lock(model, tmpl, truth, lock);
  REQUIRE(lock.locked);

  FrameState frame;
  frame.index = 1;
  FrameAnnotation now;
  now.visible = true;
  now.box = BoundingBox{43.0, 41.0, 24.0, 20.0};
  Rng rng(9);
  const TrackOutput out = simulate_tracker(model, tmpl, frame, now, lock, rng);
  CHECK(out.box == *now.box);
  CHECK(out.evidence.evidence()[0] >= 36.0);
  CHECK(out.evidence.uncertainty() < 0.06);
  CHECK(judge(out.evidence, 0.2) == Decision::ContinueTracking);
  CHECK(lock.locked);
}

TEST_CASE("an absence frame breaks the lock for good") {
  const SimTrackerModel model;  // stale_drift defaults to 2
  SimTrackerModel still = model;
  still.stale_drift = 0.0;

  FrameAnnotation truth;
  truth.visible = true;
  truth.box = BoundingBox{40.0, 40.0, 24.0, 20.0};
  const TemplateInfo tmpl{*truth.box, 0};
  TrackerLockState lock;
  acquire_lock(still, tmpl, truth, lock);
  REQUIRE(lock.locked);

  FrameState frame;
  frame.index = 1;
  Rng rng(11);
  const TrackOutput gone =
      simulate_tracker(still, tmpl, frame, FrameAnnotation{}, lock, rng);
  CHECK_FALSE(lock.locked);
  CHECK(gone.box == tmpl.box);  // zero stale drift: the box just sits there
  CHECK(gone.evidence.evidence()[0] <= 5.5);
  CHECK(gone.evidence.uncertainty() >= 0.2);
  CHECK(judge(gone.evidence, 0.2) == Decision::SwitchToDetection);

  // The target coming back does not restore the lock.
  frame.index = 2;
  FrameAnnotation back;
  back.visible = true;
  back.box = truth.box;
  const TrackOutput later = simulate_tracker(still, tmpl, frame, back, lock, rng);
  CHECK_FALSE(lock.locked);
  CHECK(later.evidence.evidence()[0] <= 5.5);
}

TEST_CASE("confusion flips the evidence regime") {
  SimTrackerModel model;
  model.confusion_rate = 1.0;
  FrameAnnotation truth;
  truth.visible = true;
  truth.box = BoundingBox{40.0, 40.0, 24.0, 20.0};
  const TemplateInfo tmpl{*truth.box, 0};
  TrackerLockState lock;
  acquire_lock(model, tmpl, truth, lock);

  FrameState frame;
  frame.index = 1;
  Rng rng(13);
  const TrackOutput out = simulate_tracker(model, tmpl, frame, truth, lock, rng);
  // On target, but reporting the off-target law.
  CHECK(out.box == *truth.box);
  CHECK(out.evidence.evidence()[0] <= 5.5);
}

TEST_CASE("tracking without an acquired lock is a logic error") {
  const SimTrackerModel model;
  const TemplateInfo tmpl{{0.0, 0.0, 10.0, 10.0}, 0};
  FrameState frame;
  frame.index = 1;
  FrameAnnotation ann;
  Rng rng(1);

  TrackerLockState uninitialized;
  CHECK_THROWS_AS(
      simulate_tracker(model, tmpl, frame, ann, uninitialized, rng),
      std::logic_error);

  TrackerLockState wrong_template;
  FrameAnnotation truth;
  truth.visible = true;
  truth.box = BoundingBox{0.0, 0.0, 10.0, 10.0};
  acquire_lock(model, tmpl, truth, wrong_template);
  const TemplateInfo newer{{0.0, 0.0, 10.0, 10.0}, 3};
  CHECK_THROWS_AS(simulate_tracker(model, newer, frame, ann, wrong_template, rng),
                  std::logic_error);
}

TEST_CASE("the tracker port re-acquires when the template changes") {
  ScenarioSpec spec = small_scenario(21);
  const Scenario scenario = generate_scenario(spec);
  const SimTrackerModel model;
  SimTracker tracker(model, scenario.annotations, 21);

  const TemplateInfo good{*scenario.annotations[0].box, 0};
  const TrackOutput on = tracker.track(good, scenario.frames[1]);
  CHECK(on.evidence.evidence()[0] >= 36.0);
  CHECK(tracker.lock_state().locked);
  CHECK(tracker.lock_state().template_frame == 0);

  // A template that never overlapped the truth cannot lock on.
  const TemplateInfo bogus{{600.0, 500.0, 10.0, 10.0}, 5};
  const TrackOutput off = tracker.track(bogus, scenario.frames[6]);
  CHECK(off.evidence.evidence()[0] <= 5.5);
  CHECK_FALSE(tracker.lock_state().locked);
  CHECK(tracker.lock_state().template_frame == 5);

  const TemplateInfo outside{{0.0, 0.0, 10.0, 10.0}, 40};
  CHECK_THROWS_AS(tracker.track(outside, scenario.frames[1]),
                  std::invalid_argument);
}

TEST_CASE("experiments are paired: identical configs get identical trials") {
  ScenarioSpec spec = small_scenario(31);
  spec.num_frames = 40;
  spec.presence = {{0, 25}, {30, 40}};
  SimDetectorModel detector;
  detector.recall = 0.8;
  detector.localization_noise = 1.5;
  SimTrackerModel tracker;
  tracker.per_frame_drift = 1.0;
  tracker.lock_loss_probability = 0.05;

  const RunConfig a{"first", RunMode::EvidentialCombination, 0.2, 0.5};
  const RunConfig b{"second", RunMode::EvidentialCombination, 0.2, 0.5};
  const auto results = run_experiment(spec, detector, tracker, {a, b}, 5);
  REQUIRE(results.size() == 2);
  CHECK(results[0].trial_acc == results[1].trial_acc);

  const auto again = run_experiment(spec, detector, tracker, {a, b}, 5);
  CHECK(again[0].trial_acc == results[0].trial_acc);
}

TEST_CASE("experiment statistics are recomputable from the trials") {
  ScenarioSpec spec = small_scenario(67);
  spec.num_frames = 30;
  spec.presence = {{0, 18}, {22, 30}};
  spec.num_distractors = 2;
  SimDetectorModel detector;
  detector.recall = 0.75;
  detector.false_positive_rate = 0.3;
  detector.localization_noise = 1.5;
  SimTrackerModel tracker;
  tracker.per_frame_drift = 2.0;
  tracker.lock_loss_probability = 0.05;
  tracker.confusion_rate = 0.05;

  const RunConfig config{"ec", RunMode::EvidentialCombination, 0.2, 0.5};
  const int trials = 6;
  const auto results = run_experiment(spec, detector, tracker, {config}, trials);
  REQUIRE(results.size() == 1);
  const auto& r = results[0];
  REQUIRE(static_cast<int>(r.trial_acc.size()) == trials);

  double sum = 0.0;
  for (double acc : r.trial_acc) sum += acc;
  const double mean = sum / trials;
  CHECK(r.mean_acc == doctest::Approx(mean).epsilon(1e-15));
  double sq = 0.0;
  for (double acc : r.trial_acc) sq += (acc - mean) * (acc - mean);
  const double std_acc = std::sqrt(sq / (trials - 1));
  CHECK(r.std_acc == doctest::Approx(std_acc).epsilon(1e-12));
  CHECK(r.std_error == doctest::Approx(std_acc / std::sqrt(6.0)).epsilon(1e-12));
}

TEST_CASE("a single trial has zero spread") {
  const ScenarioSpec spec = small_scenario(3);
  const auto results =
      run_experiment(spec, SimDetectorModel{}, SimTrackerModel{},
                     {RunConfig{"ec", RunMode::EvidentialCombination, 0.2, 0.5}}, 1);
  CHECK(results[0].trial_acc.size() == 1);
  CHECK(results[0].std_acc == 0.0);
  CHECK(results[0].std_error == 0.0);
}

TEST_CASE("noise-free components give a perfect run on every trial") {
  ScenarioSpec spec = small_scenario(77);
  spec.num_frames = 40;
  spec.presence = {{0, 15}, {20, 40}};
  const auto results =
      run_experiment(spec, SimDetectorModel{}, SimTrackerModel{},
                     {RunConfig{"ec", RunMode::EvidentialCombination, 0.2, 0.5}}, 3);
  REQUIRE(results.size() == 1);
  for (const double acc : results[0].trial_acc) CHECK(acc == 1.0);
  CHECK(results[0].mean_acc == 1.0);
}

TEST_CASE("more tracker drift means a lower mean acc") {
  ScenarioSpec spec = small_scenario(99);
  spec.num_frames = 60;
  spec.presence = {{0, 60}};
  SimTrackerModel calm;
  calm.per_frame_drift = 1.0;
  SimTrackerModel wild;
  wild.per_frame_drift = 5.0;
  const RunConfig config{"ec", RunMode::EvidentialCombination, 0.2, 0.5};

  const auto calm_results =
      run_experiment(spec, SimDetectorModel{}, calm, {config}, 10);
  const auto wild_results =
      run_experiment(spec, SimDetectorModel{}, wild, {config}, 10);
  CHECK(calm_results[0].mean_acc > wild_results[0].mean_acc);
}

TEST_CASE("experiments validate their inputs") {
  const ScenarioSpec spec = small_scenario(1);
  CHECK_THROWS_AS(
      run_experiment(spec, SimDetectorModel{}, SimTrackerModel{}, {}, 5),
      std::invalid_argument);
  CHECK_THROWS_AS(
      run_experiment(spec, SimDetectorModel{}, SimTrackerModel{},
                     {RunConfig{"ec", RunMode::EvidentialCombination, 0.2, 0.5}},
                     0),
      std::invalid_argument);

  SimDetectorModel bad_detector;
  bad_detector.recall = 1.5;
  CHECK_THROWS_AS(
      run_experiment(spec, bad_detector, SimTrackerModel{},
                     {RunConfig{"ec", RunMode::EvidentialCombination, 0.2, 0.5}},
                     1),
      std::invalid_argument);
}

TEST_CASE("run modes round-trip through their names") {
  CHECK(to_string(RunMode::EvidentialCombination) == std::string("EC"));
  CHECK(to_string(RunMode::SimpleCombination) == std::string("SC"));
  CHECK(to_string(RunMode::DetectionOnly) == std::string("DetOnly"));
  CHECK(*run_mode_from_string("EC") == RunMode::EvidentialCombination);
  CHECK(*run_mode_from_string("SC") == RunMode::SimpleCombination);
  CHECK(*run_mode_from_string("DetOnly") == RunMode::DetectionOnly);
  CHECK_FALSE(run_mode_from_string("detonly").has_value());
}
