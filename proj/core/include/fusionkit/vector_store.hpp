#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fusionkit::embedding {

struct StoreRow {
    std::string_view keyframe_id;
    std::span<const float> values;
};

/// Flat, row-major block of unit vectors for one model space.
///
/// Row i belongs to ids()[i]. On disk a store is two files:
///   <model_id>.fvs  "FVS1", u32 version, u32 id length, model_id bytes,
///                   u32 dim, u64 count, then count*dim little-endian f32
///   <model_id>.ids  one keyframe_id per line, in row order
/// Const member functions are safe to call concurrently; append() is single-writer.
class VectorStore {
public:
    static constexpr std::uint32_t kVersion = 1;

    VectorStore(std::string model_id, std::size_t dim);

    /// Throws DuplicateKeyframe, DimMismatch, NonFiniteOutput, or
    /// InvalidArgument when the vector is not unit norm.
    void append(std::string keyframe_id, std::span<const float> values);

    /// Throws UnknownKeyframe.
    [[nodiscard]] std::span<const float> get(std::string_view keyframe_id) const;
    [[nodiscard]] std::optional<std::size_t> find(std::string_view keyframe_id) const;

    [[nodiscard]] std::span<const float> row(std::size_t i) const
    {
        return {block_.data() + i * dim_, dim_};
    }
    [[nodiscard]] const std::string& id(std::size_t i) const { return ids_[i]; }
    [[nodiscard]] const std::vector<std::string>& ids() const noexcept { return ids_; }

    [[nodiscard]] const std::string& model_id() const noexcept { return model_id_; }
    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return ids_.size(); }
    [[nodiscard]] bool empty() const noexcept { return ids_.empty(); }
    [[nodiscard]] std::span<const float> block() const noexcept { return block_; }

    void reserve(std::size_t rows);

    class Iterator {
    public:
        using iterator_category = std::forward_iterator_tag;
        using value_type = StoreRow;
        using difference_type = std::ptrdiff_t;

        Iterator() = default;
        Iterator(const VectorStore* store, std::size_t i) : store_(store), i_(i) {}

        StoreRow operator*() const { return {store_->id(i_), store_->row(i_)}; }
        Iterator& operator++()
        {
            ++i_;
            return *this;
        }
        Iterator operator++(int)
        {
            auto tmp = *this;
            ++i_;
            return tmp;
        }
        bool operator==(const Iterator& other) const { return i_ == other.i_; }

    private:
        const VectorStore* store_ = nullptr;
        std::size_t i_ = 0;
    };

    /// Rows in insertion order.
    [[nodiscard]] Iterator begin() const { return {this, 0}; }
    [[nodiscard]] Iterator end() const { return {this, size()}; }

    /// Writes `<dir>/<model_id>.fvs` and `.ids` via temp files + rename.
    void save(const std::filesystem::path& dir) const;

    /// Throws Error(CorruptStore) on any header, size, id or norm inconsistency.
    static VectorStore load(const std::filesystem::path& dir, const std::string& model_id);

    /// Reads only the header of `<dir>/<model_id>.fvs`.
    struct Header {
        std::string model_id;
        std::uint32_t dim = 0;
        std::uint64_t count = 0;
    };
    static Header read_header(const std::filesystem::path& fvs_path);

    static std::filesystem::path vectors_path(const std::filesystem::path& dir, const std::string& model_id);
    static std::filesystem::path ids_path(const std::filesystem::path& dir, const std::string& model_id);

private:
    std::string model_id_;
    std::size_t dim_;
    std::vector<float> block_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
};

} // namespace fusionkit::embedding
