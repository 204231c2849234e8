#pragma once

#include <stdexcept>
#include <string>

namespace econsim {

/// Base of every domain error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define ECONSIM_DEFINE_ERROR(Name)            \
    class Name : public Error {               \
    public:                                   \
        using Error::Error;                   \
    };

// Scenario loading
ECONSIM_DEFINE_ERROR(ParseError)
ECONSIM_DEFINE_ERROR(ValidationError)
ECONSIM_DEFINE_ERROR(DanglingReference)

// Agent / market / production / labor
ECONSIM_DEFINE_ERROR(MissingPrice)
ECONSIM_DEFINE_ERROR(InsufficientInventory)
ECONSIM_DEFINE_ERROR(InsufficientFunds)
ECONSIM_DEFINE_ERROR(InsufficientLiquidity)
ECONSIM_DEFINE_ERROR(NonPositiveQuantity)
ECONSIM_DEFINE_ERROR(Incapacitated)
ECONSIM_DEFINE_ERROR(InvalidAction)
ECONSIM_DEFINE_ERROR(EmptyPopulation)

// Engine
ECONSIM_DEFINE_ERROR(AccountingMismatch)
ECONSIM_DEFINE_ERROR(IoError)

// Analytics
ECONSIM_DEFINE_ERROR(InsufficientData)
ECONSIM_DEFINE_ERROR(ZeroVariance)
ECONSIM_DEFINE_ERROR(NonPositivePrice)
ECONSIM_DEFINE_ERROR(UnsortedLog)
ECONSIM_DEFINE_ERROR(EmptyLog)
ECONSIM_DEFINE_ERROR(EmptyInput)
ECONSIM_DEFINE_ERROR(MissingCommodity)

#undef ECONSIM_DEFINE_ERROR

}  // namespace econsim
