//! Recorded model responses used as golden fixtures.

/// Caption reply to the captioning prompt for a crossroads direction sign.
pub const DIRECTION_CAPTION: &str = "<caption>This traffic sign is blue in color and has the standard shape of a traffic direction sign, with a white crossroad pattern in the center. The sign displays the names and directions of three roads:
1. Fulong Road (Fulong Rd) is located at the top of the sign, indicating a straight-ahead direction.
2. Mingle Road (Mingle Rd) is on the left side of the sign, indicating a left turn.
3. Yangtaishan Road (Yangtaishan Rd) is on the right side of the sign, indicating a right turn.
The color and shape of the traffic sign are designed to be simple and clear, using the white crossroad pattern to clearly indicate the options for going straight ahead or turning left or right. The road names are written in white font, creating a sharp contrast with the blue background, making the information easy to recognize and read. The primary purpose of the traffic sign is to help drivers choose the correct road direction, ensuring safe and efficient travel.</caption>";

/// Reply to the reasoning prompt: an FSU block only, two Direction FSUs.
pub const DIRECTION_FSU: &str = r#"<FSU>{"Traffic Sign": "Yes", "Electronic Sign": "No", "Obstruction": "Yes", "Truncation": "No", "Blurriness": "No", "Function Type": "Direction", "Number of Direction Information": "2", "Direction Information 1": {"Direction": "Go Straight", "Via": "Li Yang Road", "Destination": " [The Bund, Haining Road] "}, "Direction Information 2": {"Direction": "Turn Right", "Via": "Li Yang Road", "Destination": "Obstruction"}}</FSU>"#;

/// Caption followed by the FSU block: the two-stage response layout.
pub fn direction_caption_fsu() -> String {
    format!("{DIRECTION_CAPTION}{DIRECTION_FSU}")
}

/// Reply to the combined prompt: caption then three Direction FSUs, with
/// alternate global key spellings and arrow values outside the closed set.
pub const CROSSROADS_CAPTION_FSU: &str = r#"<caption>This traffic sign is blue in color and has a standard traffic sign shape with a white crossroad pattern in the center. The sign displays the names and directions of three roads: 1. Fulong Road (Fulong Rd) is located at the top of the sign, indicating a straight ahead direction. 2. Mingle Road (Mingle Rd) is on the left side of the sign, indicating a left turn. 3. Yangtaishan Road (Yangtaishan Rd) is on the right side of the sign, indicating a right turn. The color and shape of the traffic sign are designed to be simple and clear, using the white crossroad pattern to clearly indicate the options for going straight ahead or turning left or right. The road names are written in white font, creating a sharp contrast with the blue background, making the information easy to recognize and read. The primary purpose of the traffic sign is to help drivers choose the correct road direction, ensuring safe and efficient driving.</caption><FSU>{"Traffic Sign": "Yes", "Electronic Sign": "No", "Blocked": "No", "Truncated": "No", "Blurred": "No", "Function Type": "Direction", "Number of Direction Information": "3", "Direction Information 1": {"Direction": "Straight Ahead", "Destination": " [Fulong Road, Fulong Rd] "}, "Direction Information 2": {"Direction": "Left Turn", "Destination": " [Mingle Road, Mingle Rd] "}, "Direction Information 3": {"Direction": "Right Turn", "Destination": " [Yangtaishan Road, Yangtaishan Rd] "}}</FSU>"#;
