#include "isopara/error.hpp"

namespace isopara {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
        case ErrorCode::NotAProjection: return "NotAProjection";
        case ErrorCode::SingularJacobian: return "SingularJacobian";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::NonPositiveFk: return "NonPositiveFk";
        case ErrorCode::PoleCrossed: return "PoleCrossed";
        case ErrorCode::RankOutOfRange: return "RankOutOfRange";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::AxisTooClose: return "AxisTooClose";
        case ErrorCode::StepTooSmall: return "StepTooSmall";
        case ErrorCode::CriticalPoint: return "CriticalPoint";
        case ErrorCode::DomainExit: return "DomainExit";
        case ErrorCode::GroupingAmbiguous: return "GroupingAmbiguous";
        case ErrorCode::ProfileRangeExceeded: return "ProfileRangeExceeded";
        case ErrorCode::FocalPoint: return "FocalPoint";
        case ErrorCode::InadmissibleSegment: return "InadmissibleSegment";
        case ErrorCode::InadmissibleStencil: return "InadmissibleStencil";
        case ErrorCode::ParseError: return "ParseError";
    }
    return "Unknown";
}

}  // namespace isopara
