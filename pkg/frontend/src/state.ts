/** Annotation submission state machine (pure reducers).
 *
 * The flow is optimistic: a verdict click flips the visible status right
 * away, a failed POST restores the previous status but keeps the draft so
 * the reviewer can retry, and a 409 (control parcel) surfaces its
 * explanation instead of offering a retry.
 */

export interface AnnotationState {
  status: "annotated" | "unannotated";
  changeVisible: boolean | null;
  draft: boolean | null;
  pending: boolean;
  error: string | null;
  retryable: boolean;
}

export function initialAnnotationState(
  status: "annotated" | "unannotated",
  changeVisible: boolean | null,
): AnnotationState {
  return { status, changeVisible, draft: null, pending: false, error: null, retryable: false };
}

export function beginSubmit(state: AnnotationState, verdict: boolean): AnnotationState {
  return {
    ...state,
    draft: verdict,
    pending: true,
    error: null,
    retryable: false,
    // optimistic flip; reverted by submitFailed
    status: "annotated",
    changeVisible: verdict,
  };
}

export function submitSucceeded(state: AnnotationState): AnnotationState {
  return {
    ...state,
    pending: false,
    draft: null, // draft cleared only after a successful POST
    error: null,
    retryable: false,
  };
}

export function submitFailed(
  state: AnnotationState,
  previous: AnnotationState,
  message: string,
  status?: number,
): AnnotationState {
  const conflict = status === 409;
  return {
    status: previous.status,
    changeVisible: previous.changeVisible,
    draft: conflict ? null : state.draft, // retain the draft for retry
    pending: false,
    error: message,
    retryable: !conflict,
  };
}
