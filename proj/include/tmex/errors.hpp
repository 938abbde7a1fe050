#pragma once

#include <stdexcept>
#include <string>

namespace tmex {

// Error categories map to CLI exit codes: config = 2, data = 3, numeric = 4.
enum class ErrorCategory { Config, Data, Numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, const std::string& what) : std::runtime_error(what), category_(cat) {}
    ErrorCategory category() const { return category_; }

private:
    ErrorCategory category_;
};

#define TMEX_DEFINE_ERROR(Name, Cat)                                          \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& what) : Error(ErrorCategory::Cat, what) {} \
    }

TMEX_DEFINE_ERROR(ConfigError, Config);
TMEX_DEFINE_ERROR(DataError, Data);
TMEX_DEFINE_ERROR(CycleError, Data);
TMEX_DEFINE_ERROR(ArityError, Data);
TMEX_DEFINE_ERROR(DimError, Data);
TMEX_DEFINE_ERROR(ShapeError, Data);
TMEX_DEFINE_ERROR(SingularError, Numeric);
TMEX_DEFINE_ERROR(DegenerateError, Numeric);
TMEX_DEFINE_ERROR(SmallSampleError, Data);
TMEX_DEFINE_ERROR(OverlapError, Numeric);
TMEX_DEFINE_ERROR(WeakInstrumentError, Numeric);

#undef TMEX_DEFINE_ERROR

}  // namespace tmex
