#include "presetforge/nn/checkpoint.hpp"

#include <bit>
#include <cstring>

#include "presetforge/fileutil.hpp"

namespace presetforge::nn {

namespace {

using nlohmann::json;

constexpr int kFormatVersion = 1;
constexpr const char* kMomentM = "adam.m/";
constexpr const char* kMomentV = "adam.v/";

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

void put_f32(std::vector<std::uint8_t>& out, const Tensor& t) {
    const std::size_t start = out.size();
    out.resize(start + 4 * t.size());
    std::uint8_t* dst = out.data() + start;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto bits = std::bit_cast<std::uint32_t>(t[i]);
        for (int b = 0; b < 4; ++b) dst[4 * i + b] = static_cast<std::uint8_t>(bits >> (8 * b));
    }
}

void get_f32(const std::uint8_t* src, Tensor& t) {
    for (std::size_t i = 0; i < t.size(); ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b) bits |= static_cast<std::uint32_t>(src[4 * i + b]) << (8 * b);
        t[i] = std::bit_cast<float>(bits);
    }
}

struct Entry {
    std::string name;
    const Tensor* tensor;
};

[[noreturn]] void corrupt(const std::string& what) { throw Error(Errc::CorruptHeader, "checkpoint header: " + what); }

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
    std::vector<Entry> entries;
    for (const auto& [name, t] : ckpt.params.tensors) entries.push_back({name, &t});
    if (ckpt.adam) {
        for (const auto& [name, t] : ckpt.adam->m.tensors) entries.push_back({kMomentM + name, &t});
        for (const auto& [name, t] : ckpt.adam->v.tensors) entries.push_back({kMomentV + name, &t});
    }
    json header;
    header["format"] = kFormatVersion;
    header["version"] = ckpt.params.version;
    header["meta"] = ckpt.meta;
    if (ckpt.adam) {
        const auto& c = ckpt.adam->config;
        header["adam"] = {{"step", ckpt.adam->step},
                          {"lr", c.lr},
                          {"beta1", c.beta1},
                          {"beta2", c.beta2},
                          {"eps", c.eps}};
    }
    json tensors = json::array();
    std::uint64_t offset = 0;
    for (const auto& e : entries) {
        const std::uint64_t nbytes = 4 * e.tensor->size();
        tensors.push_back(
            {{"name", e.name}, {"shape", e.tensor->shape()}, {"dtype", "f32"}, {"offset", offset}, {"nbytes", nbytes}});
        offset += nbytes;
    }
    header["tensors"] = std::move(tensors);
    const std::string text = header.dump();

    std::vector<std::uint8_t> out(kCheckpointMagic, kCheckpointMagic + 8);
    put_u64(out, text.size());
    out.insert(out.end(), text.begin(), text.end());
    out.reserve(out.size() + offset);
    for (const auto& e : entries) put_f32(out, *e.tensor);
    return out;
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 8 || std::memcmp(bytes.data(), kCheckpointMagic, 8) != 0) {
        throw Error(Errc::BadMagic, "not a DPRESET1 checkpoint");
    }
    if (bytes.size() < 16) throw Error(Errc::TruncatedData, "checkpoint ends inside the header length");
    const std::uint64_t header_len = get_u64(bytes.data() + 8);
    if (header_len > bytes.size() - 16) throw Error(Errc::TruncatedData, "checkpoint ends inside the header");
    const auto* hp = reinterpret_cast<const char*>(bytes.data() + 16);
    json header;
    try {
        header = json::parse(hp, hp + header_len);
    } catch (const json::exception& e) {
        corrupt(e.what());
    }
    const std::uint8_t* data = bytes.data() + 16 + header_len;
    const std::uint64_t data_len = bytes.size() - 16 - header_len;

    Checkpoint ckpt;
    try {
        if (header.at("format").get<int>() != kFormatVersion) corrupt("unsupported format version");
        ckpt.params.version = header.at("version").get<std::string>();
        if (header.contains("meta")) ckpt.meta = header["meta"];
        if (header.contains("adam")) {
            const auto& a = header["adam"];
            AdamState s;
            s.step = a.at("step").get<std::uint64_t>();
            s.config = {a.at("lr").get<double>(), a.at("beta1").get<double>(), a.at("beta2").get<double>(),
                        a.at("eps").get<double>()};
            ckpt.adam = std::move(s);
        }
        for (const auto& t : header.at("tensors")) {
            const auto name = t.at("name").get<std::string>();
            const auto shape = t.at("shape").get<Shape>();
            if (t.at("dtype").get<std::string>() != "f32") corrupt("unsupported dtype for " + name);
            const auto offset = t.at("offset").get<std::uint64_t>();
            const auto nbytes = t.at("nbytes").get<std::uint64_t>();
            if (shape.empty()) corrupt("empty shape for " + name);
            for (auto d : shape) {
                if (d == 0) corrupt("zero dimension for " + name);
            }
            if (nbytes != 4 * shape_numel(shape)) corrupt("byte count does not match shape for " + name);
            if (offset > data_len || nbytes > data_len - offset) {
                throw Error(Errc::TruncatedData, "checkpoint data ends before tensor " + name);
            }
            Tensor tensor(shape);
            get_f32(data + offset, tensor);
            BasicParams<float>* target = &ckpt.params;
            std::string key = name;
            if (name.starts_with(kMomentM) || name.starts_with(kMomentV)) {
                if (!ckpt.adam) corrupt("moment tensor without adam state: " + name);
                target = name.starts_with(kMomentM) ? &ckpt.adam->m : &ckpt.adam->v;
                key = name.substr(std::strlen(kMomentM));
            }
            if (!target->tensors.emplace(key, std::move(tensor)).second) corrupt("duplicate tensor " + name);
        }
    } catch (const json::exception& e) {
        corrupt(e.what());
    }
    if (ckpt.adam) {
        ckpt.adam->m.version = ckpt.params.version;
        ckpt.adam->v.version = ckpt.params.version;
    }
    return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    write_file_atomic(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file_bytes(path)); }

}  // namespace presetforge::nn
