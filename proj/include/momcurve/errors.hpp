#pragma once

// Error taxonomy shared by all modules; names follow the spec's error labels.

#include <stdexcept>
#include <string>

namespace momcurve {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define MOMCURVE_ERROR(Name)                                              \
    struct Name : Error {                                                 \
        explicit Name(const std::string& what = #Name) : Error(what) {}   \
    }

MOMCURVE_ERROR(SingularMatrix);
MOMCURVE_ERROR(SingularBlock);
MOMCURVE_ERROR(ZeroPolynomial);
MOMCURVE_ERROR(DegreeTooHigh);
MOMCURVE_ERROR(WrongAuxKeys);
MOMCURVE_ERROR(CompressionNotPD);
MOMCURVE_ERROR(PreconditionViolated);
MOMCURVE_ERROR(NotRecursivelyGenerated);
MOMCURVE_ERROR(NotPsd);
MOMCURVE_ERROR(NumericalRootFailure);
MOMCURVE_ERROR(RequirementsNotMet);
MOMCURVE_ERROR(NotCompletable);
MOMCURVE_ERROR(UnknownExample);
MOMCURVE_ERROR(ParseError);
MOMCURVE_ERROR(NotPure);
MOMCURVE_ERROR(FieldTowerUnsupported);

#undef MOMCURVE_ERROR

}  // namespace momcurve
