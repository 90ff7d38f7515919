#include "erft/config.hpp"

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "erft/errors.hpp"

namespace erft {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& value) {
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0' || errno == ERANGE || !std::isfinite(v))
        throw ConfigError(key, "expected a finite number, got '" + value + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    if (value.empty() || value[0] == '-')
        throw ConfigError(key, "expected a non-negative integer, got '" + value + "'");
    errno = 0;
    char* end = nullptr;
    const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0' || errno == ERANGE)
        throw ConfigError(key, "expected a non-negative integer, got '" + value + "'");
    return static_cast<std::uint64_t>(v);
}

std::size_t parse_size(const std::string& key, const std::string& value, std::size_t min_value) {
    const std::uint64_t v = parse_u64(key, value);
    if (v < min_value)
        throw ConfigError(key, "must be >= " + std::to_string(min_value) + ", got '" + value + "'");
    return static_cast<std::size_t>(v);
}

double parse_probability(const std::string& key, const std::string& value) {
    const double v = parse_double(key, value);
    if (v < 0.0 || v > 1.0) throw ConfigError(key, "must be in [0, 1], got '" + value + "'");
    return v;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void apply_config_entry(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "latent_error_p") c.latent_error_p = parse_probability(key, value);
    else if (key == "image_error_p") c.image_error_p = parse_probability(key, value);
    else if (key == "noise_error_p") c.noise_error_p = parse_probability(key, value);
    else if (key == "clean_input_p") c.clean_input_p = parse_probability(key, value);
    else if (key == "max_errors_per_grid") c.max_errors_per_grid = parse_size(key, value, 1);
    else if (key == "timestep_grids") c.timestep_grids = parse_size(key, value, 1);
    else if (key == "warmup_iterations") c.warmup_iterations = parse_size(key, value, 0);
    else if (key == "workers") c.workers = parse_size(key, value, 1);
    else if (key == "train_timesteps") c.train_timesteps = parse_size(key, value, 2);
    else if (key == "clip_frames") c.clip_frames = parse_size(key, value, 2);
    else if (key == "clip_dim") {
        c.clip_dim = parse_size(key, value, 2);
        if (c.clip_dim % 2 != 0) throw ConfigError(key, "must be even, got '" + value + "'");
    } else if (key == "frame_angle") c.frame_angle = parse_double(key, value);
    else if (key == "data_noise") {
        c.data_noise = parse_double(key, value);
        if (c.data_noise < 0.0) throw ConfigError(key, "must be >= 0, got '" + value + "'");
    } else if (key == "hidden_layers") c.hidden_layers = parse_size(key, value, 0);
    else if (key == "hidden_width") c.hidden_width = parse_size(key, value, 1);
    else if (key == "condition_dim") c.condition_dim = parse_size(key, value, 0);
    else if (key == "learning_rate") {
        c.learning_rate = parse_double(key, value);
        if (c.learning_rate < 0.0) throw ConfigError(key, "must be >= 0, got '" + value + "'");
    } else if (key == "train_steps") c.train_steps = parse_size(key, value, 0);
    else if (key == "batch_size") c.batch_size = parse_size(key, value, 1);
    else if (key == "motion_frames") c.motion_frames = parse_size(key, value, 1);
    else if (key == "reference_mode") {
        if (value != "last_frame" && value != "motion_frames" && value != "fixed_anchor")
            throw ConfigError(key, "must be one of last_frame|motion_frames|fixed_anchor, got '" +
                                       value + "'");
        c.reference_mode = value;
    } else if (key == "num_clips") c.num_clips = parse_size(key, value, 1);
    else if (key == "seed") c.seed = parse_u64(key, value);
    else if (key == "out_dir") c.out_dir = value;
    else throw ConfigError(key, "unknown key");
}

void RunConfig::validate() const {
    if (motion_frames > clip_frames)
        throw ConfigError("motion_frames", "must be <= clip_frames (" +
                                               std::to_string(clip_frames) + "), got " +
                                               std::to_string(motion_frames));
    // Cheap way to surface any remaining cross-field violation with the
    // library's own invalid-argument text attached to a config error.
    try {
        trainer_config().validate();
        rollout_config().validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("config", e.what());
    }
}

ClipSpec RunConfig::clip_spec() const {
    return ClipSpec{clip_frames, clip_dim, frame_angle, data_noise};
}

TimestepSchedule RunConfig::schedule() const {
    return TimestepSchedule{train_timesteps, timestep_grids};
}

InjectionConfig RunConfig::injection_config() const {
    return InjectionConfig{latent_error_p, image_error_p, noise_error_p, clean_input_p};
}

ReferenceMode RunConfig::reference_mode_enum() const {
    if (reference_mode == "last_frame") return ReferenceMode::last_frame;
    if (reference_mode == "motion_frames") return ReferenceMode::motion_frames;
    if (reference_mode == "fixed_anchor") return ReferenceMode::fixed_anchor;
    throw ConfigError("reference_mode", "unknown mode '" + reference_mode + "'");
}

TrainerConfig RunConfig::trainer_config() const {
    TrainerConfig t;
    t.clip = clip_spec();
    t.cond_dim = condition_dim;
    t.hidden_layers = hidden_layers;
    t.hidden_width = hidden_width;
    t.schedule = schedule();
    t.injection = injection_config();
    t.bank_capacity = max_errors_per_grid;
    t.warmup_iters = warmup_iterations;
    t.workers = workers;
    t.steps = train_steps;
    t.batch_size = batch_size;
    t.learning_rate = learning_rate;
    t.seed = seed;
    return t;
}

RolloutConfig RunConfig::rollout_config() const {
    RolloutConfig r;
    r.num_clips = num_clips;
    r.motion_frames = motion_frames;
    r.reference_mode = reference_mode_enum();
    r.schedule = schedule();
    r.clip = clip_spec();
    return r;
}

RunConfig parse_config_text(const std::string& text, const RunConfig& base) {
    RunConfig c = base;
    std::istringstream is(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw ConfigError(stripped, "line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty())
            throw ConfigError(stripped, "line " + std::to_string(line_no) + ": empty key");
        apply_config_entry(c, key, value);
    }
    c.validate();
    return c;
}

RunConfig parse_config_file(const std::filesystem::path& path, const RunConfig& base) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path.string(), "cannot open config file");
    std::ostringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str(), base);
}

std::string dump_config(const RunConfig& c) {
    std::ostringstream os;
    os << "latent_error_p=" << format_double(c.latent_error_p) << "\n"
       << "image_error_p=" << format_double(c.image_error_p) << "\n"
       << "noise_error_p=" << format_double(c.noise_error_p) << "\n"
       << "clean_input_p=" << format_double(c.clean_input_p) << "\n"
       << "max_errors_per_grid=" << c.max_errors_per_grid << "\n"
       << "timestep_grids=" << c.timestep_grids << "\n"
       << "warmup_iterations=" << c.warmup_iterations << "\n"
       << "workers=" << c.workers << "\n"
       << "train_timesteps=" << c.train_timesteps << "\n"
       << "clip_frames=" << c.clip_frames << "\n"
       << "clip_dim=" << c.clip_dim << "\n"
       << "frame_angle=" << format_double(c.frame_angle) << "\n"
       << "data_noise=" << format_double(c.data_noise) << "\n"
       << "hidden_layers=" << c.hidden_layers << "\n"
       << "hidden_width=" << c.hidden_width << "\n"
       << "condition_dim=" << c.condition_dim << "\n"
       << "learning_rate=" << format_double(c.learning_rate) << "\n"
       << "train_steps=" << c.train_steps << "\n"
       << "batch_size=" << c.batch_size << "\n"
       << "motion_frames=" << c.motion_frames << "\n"
       << "reference_mode=" << c.reference_mode << "\n"
       << "num_clips=" << c.num_clips << "\n"
       << "seed=" << c.seed << "\n"
       << "out_dir=" << c.out_dir << "\n";
    return os.str();
}

} // namespace erft
