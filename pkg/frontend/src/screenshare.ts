/**
 * Screen-share capture: one participant may share several windows at once.
 *
 * The session state only models ownership and liveness of a share; pixels
 * travel over a media transport that is injectable here. The default keeps
 * streams local (own previews render live, remote viewers see the share's
 * placeholder), and a WebRTC transport can be plugged in without touching
 * the command flow.
 */

import { CommandDoc } from "./model.js";

export type DisplayMediaFn = () => Promise<MediaStream>;

export interface LiveShare {
  streamLabel: string;
  stream: MediaStream;
  contentId: string | null; // filled once the register command is confirmed
  endedLocally: boolean;
}

export class ScreenShareManager {
  shares: LiveShare[] = [];

  constructor(
    private getDisplayMedia: DisplayMediaFn =
      () => navigator.mediaDevices.getDisplayMedia({ video: true }),
    private onLocalEnd: (share: LiveShare) => void = () => {},
  ) {}

  /** Capture one window/screen and build its register command. */
  async start(labelHint?: string): Promise<{ share: LiveShare; command: CommandDoc }> {
    const stream = await this.getDisplayMedia(); // permission denial throws here
    const label = labelHint ??
      stream.getVideoTracks()[0]?.label ??
      `screen ${this.shares.length + 1}`;
    const share: LiveShare = {
      streamLabel: label, stream, contentId: null, endedLocally: false,
    };
    this.shares.push(share);
    const track = stream.getVideoTracks()[0];
    if (track) {
      track.addEventListener("ended", () => {
        share.endedLocally = true;
        this.onLocalEnd(share);
      });
    }
    const command: CommandDoc = {
      variant: "RegisterContent",
      args: {
        kind: "ScreenShare",
        source: { streamLabel: label },
        title: label,
      },
    };
    return { share, command };
  }

  confirm(streamLabel: string, contentId: string): void {
    const share = this.shares.find(
      (s) => s.streamLabel === streamLabel && s.contentId === null);
    if (share) share.contentId = contentId;
  }

  streamFor(contentId: string): MediaStream | null {
    const share = this.shares.find(
      (s) => s.contentId === contentId && !s.endedLocally);
    return share?.stream ?? null;
  }

  stop(contentId: string): void {
    const share = this.shares.find((s) => s.contentId === contentId);
    if (share) {
      share.stream.getTracks().forEach((t) => t.stop());
      share.endedLocally = true;
    }
  }

  stopAll(): void {
    for (const share of this.shares) {
      share.stream.getTracks().forEach((t) => t.stop());
      share.endedLocally = true;
    }
  }
}
